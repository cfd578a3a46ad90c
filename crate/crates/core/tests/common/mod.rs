//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use eoswap::{LogicalEmbedding, SpinPair, SubspaceUnitaries};
use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64 as C64;

const DIM: usize = 64;

fn bit(state: usize, pos: usize) -> usize {
    (state >> (5 - pos)) & 1
}

/// Full-space `SWAP^alpha = 1 + (e^{-i pi alpha} - 1) (1 - SWAP)/2`, built
/// from the bit-exchange permutation. Spin `k` of `Spin::ALL` is tensor
/// factor `k`, factor 0 most significant.
pub fn swap_alpha_64(pair: SpinPair, alpha: f64) -> DMatrix<C64> {
    let (a, b) = pair.spins();
    let (pa, pb) = (a.index(), b.index());
    let coef = (C64::new(0.0, -std::f64::consts::PI * alpha)).exp() - 1.0;
    let mut m = DMatrix::<C64>::identity(DIM, DIM);
    for s in 0..DIM {
        let swapped = if bit(s, pa) == bit(s, pb) {
            s
        } else {
            s ^ (1 << (5 - pa)) ^ (1 << (5 - pb))
        };
        // P_s = (1 - SWAP) / 2
        m[(s, s)] += coef * 0.5;
        m[(swapped, s)] -= coef * 0.5;
    }
    m
}

pub fn product_64(pulses: &[(SpinPair, f64)]) -> DMatrix<C64> {
    pulses
        .iter()
        .fold(DMatrix::identity(DIM, DIM), |u, &(pair, a)| {
            swap_alpha_64(pair, a) * u
        })
}

/// Sector blocks of a full-space operator and the largest amplitude it sends
/// outside each sector.
pub fn restrict_64(u: &DMatrix<C64>) -> (SubspaceUnitaries, f64) {
    let emb = LogicalEmbedding::standard();
    let img0 = u * &emb.basis0;
    let img1 = u * &emb.basis1;
    let r0 = emb.basis0.adjoint() * &img0;
    let r1 = emb.basis1.adjoint() * &img1;
    let leak0 = (&img0 - &emb.basis0 * &r0)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let leak1 = (&img1 - &emb.basis1 * &r1)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let us = SubspaceUnitaries {
        spin0: SMatrix::from_fn(|i, j| r0[(i, j)]),
        spin1: SMatrix::from_fn(|i, j| r1[(i, j)]),
    };
    (us, leak0.max(leak1))
}

/// `sqrt(2 - |tr(T^dag B0)|/4 - |tr(T^dag B1)|/4)` with the logical 4x4
/// blocks cut from the sector unitaries.
pub fn direct_distance(us: &SubspaceUnitaries, target: &[[f64; 4]; 4]) -> f64 {
    let tr = |get: &dyn Fn(usize, usize) -> C64| {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                t += target[i][j] * get(i, j);
            }
        }
        t.norm()
    };
    let t0 = tr(&|i, j| us.spin0[(i, j)]);
    let t1 = tr(&|i, j| us.spin1[(i, j)]);
    (2.0 - t0 / 4.0 - t1 / 4.0).max(0.0).sqrt()
}

/// Logical CNOT in the basis order 00, 01, 10, 11 (control first).
pub const CNOT: [[f64; 4]; 4] = [
    [1., 0., 0., 0.],
    [0., 1., 0., 0.],
    [0., 0., 0., 1.],
    [0., 0., 1., 0.],
];
pub const CZ: [[f64; 4]; 4] = [
    [1., 0., 0., 0.],
    [0., 1., 0., 0.],
    [0., 0., 1., 0.],
    [0., 0., 0., -1.],
];
