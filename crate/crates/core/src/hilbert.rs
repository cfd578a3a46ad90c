//! Six-spin Hilbert space and the two-qubit logical embedding.
//!
//! Two logical qubits `A` and `B` are each carried by three spin-1/2
//! particles. Exchange pulses conserve total spin, so every pulse sequence is
//! block diagonal in the total-spin sectors. Only two blocks matter for the
//! logical gate: the total-spin-0 sector (dimension 5) and one fixed-`S_z`
//! slice of the total-spin-1 sector (dimension 9). In both, the first four
//! basis columns are the logical states `|00>, |01>, |10>, |11>`; the rest are
//! leakage states.
//!
//! Spin states use bit value 0 for spin up. Basis index bits are ordered by
//! tensor-factor position, position 0 being the most significant bit.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix5c = SMatrix<C64, 5, 5>;
pub type Matrix9c = SMatrix<C64, 9, 9>;
pub type Matrix4c = SMatrix<C64, 4, 4>;

/// Number of physical spins.
pub const N_SPINS: usize = 6;
/// Dimension of the full six-spin space.
pub const FULL_DIM: usize = 1 << N_SPINS;
pub const DIM_SPIN0: usize = 5;
pub const DIM_SPIN1: usize = 9;

/// Default tolerance for matrix comparisons.
pub const MATRIX_EPS: f64 = 1e-12;

/// Abstract spin label. `A1..A3` belong to qubit A, `B1..B3` to qubit B.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
}

impl Spin {
    pub const ALL: [Spin; N_SPINS] = [Spin::A1, Spin::A2, Spin::A3, Spin::B1, Spin::B2, Spin::B3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Spin> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::A1 => "A1",
            Spin::A2 => "A2",
            Spin::A3 => "A3",
            Spin::B1 => "B1",
            Spin::B2 => "B2",
            Spin::B3 => "B3",
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Spin> {
        Spin::ALL
            .iter()
            .copied()
            .find(|sp| sp.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown spin label {s:?}")))
    }
}

/// Unordered pair of distinct spins. Stored with the lower label first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinPair {
    lo: Spin,
    hi: Spin,
}

impl SpinPair {
    pub fn new(a: Spin, b: Spin) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidPair(a.to_string(), b.to_string()));
        }
        Ok(if a < b {
            SpinPair { lo: a, hi: b }
        } else {
            SpinPair { lo: b, hi: a }
        })
    }

    pub fn spins(self) -> (Spin, Spin) {
        (self.lo, self.hi)
    }

    pub fn contains(self, s: Spin) -> bool {
        self.lo == s || self.hi == s
    }

    pub fn shares_spin(self, other: SpinPair) -> bool {
        self.contains(other.lo) || self.contains(other.hi)
    }

    /// Dense index in `0..15`.
    fn slot(self) -> usize {
        let (i, j) = (self.lo.index(), self.hi.index());
        // row-major upper triangle
        i * (2 * N_SPINS - i - 1) / 2 + (j - i - 1)
    }
}

impl fmt::Display for SpinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

const N_PAIRS: usize = N_SPINS * (N_SPINS - 1) / 2;

fn all_pairs() -> impl Iterator<Item = SpinPair> {
    (0..N_SPINS).flat_map(|i| {
        (i + 1..N_SPINS).map(move |j| SpinPair {
            lo: Spin::ALL[i],
            hi: Spin::ALL[j],
        })
    })
}

/// Maps each spin label to a tensor-factor position.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitOrder([usize; N_SPINS]);

impl QubitOrder {
    pub fn identity() -> Self {
        QubitOrder([0, 1, 2, 3, 4, 5])
    }

    /// `positions[k]` is the tensor-factor position of `Spin::ALL[k]`.
    pub fn new(positions: [usize; N_SPINS]) -> Result<Self> {
        let mut seen = [false; N_SPINS];
        for &p in &positions {
            if p >= N_SPINS || seen[p] {
                return Err(Error::Config(format!(
                    "{positions:?} is not a permutation of 0..6"
                )));
            }
            seen[p] = true;
        }
        Ok(QubitOrder(positions))
    }

    pub fn position(&self, s: Spin) -> usize {
        self.0[s.index()]
    }
}

impl Default for QubitOrder {
    fn default() -> Self {
        Self::identity()
    }
}

/// A gate sequence represented on the two relevant total-spin sectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceUnitaries {
    pub spin0: Matrix5c,
    pub spin1: Matrix9c,
}

impl SubspaceUnitaries {
    pub fn identity() -> Self {
        SubspaceUnitaries {
            spin0: Matrix5c::identity(),
            spin1: Matrix9c::identity(),
        }
    }

    /// `later * self`: apply `self` first, then `later`.
    pub fn then(&self, later: &SubspaceUnitaries) -> SubspaceUnitaries {
        SubspaceUnitaries {
            spin0: later.spin0 * self.spin0,
            spin1: later.spin1 * self.spin1,
        }
    }

    pub fn adjoint(&self) -> SubspaceUnitaries {
        SubspaceUnitaries {
            spin0: self.spin0.adjoint(),
            spin1: self.spin1.adjoint(),
        }
    }

    /// Entrywise complex conjugate (not the adjoint).
    pub fn conjugate(&self) -> SubspaceUnitaries {
        SubspaceUnitaries {
            spin0: self.spin0.map(|z| z.conj()),
            spin1: self.spin1.map(|z| z.conj()),
        }
    }

    /// Largest entrywise modulus of the difference over both sectors.
    pub fn max_abs_diff(&self, other: &SubspaceUnitaries) -> f64 {
        let d0 = (self.spin0 - other.spin0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let d1 = (self.spin1 - other.spin1)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        d0.max(d1)
    }

    pub fn approx_eq(&self, other: &SubspaceUnitaries, eps: f64) -> bool {
        self.max_abs_diff(other) <= eps
    }

    /// Largest entry of `U^dagger U - 1` in each sector.
    pub fn unitarity_residuals(&self) -> (f64, f64) {
        let r0 = (self.spin0.adjoint() * self.spin0 - Matrix5c::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let r1 = (self.spin1.adjoint() * self.spin1 - Matrix9c::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        (r0, r1)
    }

    /// The four logical columns of each sector.
    pub fn logical_columns(&self) -> LogicalColumns {
        LogicalColumns {
            spin0: self.spin0.fixed_view::<5, 4>(0, 0).into_owned(),
            spin1: self.spin1.fixed_view::<9, 4>(0, 0).into_owned(),
        }
    }
}

/// Images of the four logical states in each sector: the logical block in
/// the top four rows, leakage amplitudes below.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalColumns {
    pub spin0: SMatrix<C64, 5, 4>,
    pub spin1: SMatrix<C64, 9, 4>,
}

impl LogicalColumns {
    pub fn block0(&self) -> Matrix4c {
        self.spin0.fixed_view::<4, 4>(0, 0).into_owned()
    }

    pub fn block1(&self) -> Matrix4c {
        self.spin1.fixed_view::<4, 4>(0, 0).into_owned()
    }
}

/// The singlet projector of one spin pair on the full space; `exp(-i pi alpha P)`
/// is the `SWAP^alpha` pulse.
#[derive(Clone, Debug)]
pub struct SwapGenerator {
    pub pair: SpinPair,
    pub singlet_projector: DMatrix<C64>,
}

#[derive(Clone, Debug)]
struct SectorProjector {
    spin0: Matrix5c,
    spin1: Matrix9c,
}

/// Orthonormal bases for the spin-0 and spin-1 (`S_z = +1`) sectors, with the
/// logical states in the first four columns of each.
#[derive(Clone, Debug)]
pub struct LogicalEmbedding {
    pub basis0: DMatrix<C64>,
    pub basis1: DMatrix<C64>,
    pub qubit_order: QubitOrder,
    projectors: Vec<SectorProjector>,
}

static STANDARD: LazyLock<LogicalEmbedding> =
    LazyLock::new(|| build_logical_embedding(QubitOrder::identity()));

/// `exp(-i pi alpha) - 1`, the coefficient of the projector in `SWAP^alpha`.
#[inline]
pub fn pulse_coefficient(alpha: f64) -> C64 {
    let (s, c) = (-std::f64::consts::PI * alpha).sin_cos();
    C64::new(c - 1.0, s)
}

impl LogicalEmbedding {
    /// Shared embedding for the identity qubit order.
    pub fn standard() -> &'static LogicalEmbedding {
        &STANDARD
    }

    /// Sector blocks of the singlet projector of `pair`.
    pub(crate) fn sector_projectors(&self, pair: SpinPair) -> (&Matrix5c, &Matrix9c) {
        let p = &self.projectors[pair.slot()];
        (&p.spin0, &p.spin1)
    }

    pub fn swap_generator(&self, pair: SpinPair) -> SwapGenerator {
        SwapGenerator {
            pair,
            singlet_projector: singlet_projector_full(pair, &self.qubit_order),
        }
    }

    /// `exp(-i pi alpha P_s)` restricted to both sectors.
    pub fn swap_alpha(&self, pair: SpinPair, alpha: f64) -> SubspaceUnitaries {
        let p = &self.projectors[pair.slot()];
        let c = pulse_coefficient(alpha);
        SubspaceUnitaries {
            spin0: Matrix5c::identity() + p.spin0 * c,
            spin1: Matrix9c::identity() + p.spin1 * c,
        }
    }

    /// Product of pulses, first pulse applied first.
    pub fn pulses_unitary<I>(&self, pulses: I) -> SubspaceUnitaries
    where
        I: IntoIterator<Item = (SpinPair, f64)>,
    {
        let mut u = SubspaceUnitaries::identity();
        for (pair, alpha) in pulses {
            let p = &self.projectors[pair.slot()];
            let c = pulse_coefficient(alpha);
            u.spin0 += (p.spin0 * u.spin0) * c;
            u.spin1 += (p.spin1 * u.spin1) * c;
        }
        u
    }

    /// Logical columns of a pulse product. Only these four columns are
    /// propagated, which is all the distance measures need.
    pub fn pulses_logical_columns<I>(&self, pulses: I) -> LogicalColumns
    where
        I: IntoIterator<Item = (SpinPair, f64)>,
    {
        let mut c0 = SMatrix::<C64, 5, 4>::identity();
        let mut c1 = SMatrix::<C64, 9, 4>::identity();
        for (pair, alpha) in pulses {
            let p = &self.projectors[pair.slot()];
            let c = pulse_coefficient(alpha);
            c0 += (p.spin0 * c0) * c;
            c1 += (p.spin1 * c1) * c;
        }
        LogicalColumns {
            spin0: c0,
            spin1: c1,
        }
    }

    /// Restricts a full-space operator to both sectors.
    pub fn restrict(&self, full: &DMatrix<C64>) -> SubspaceUnitaries {
        let r0 = self.basis0.adjoint() * full * &self.basis0;
        let r1 = self.basis1.adjoint() * full * &self.basis1;
        SubspaceUnitaries {
            spin0: Matrix5c::from_fn(|i, j| r0[(i, j)]),
            spin1: Matrix9c::from_fn(|i, j| r1[(i, j)]),
        }
    }

    /// Full 64x64 product of pulses (the reference route the sector products
    /// are checked against).
    pub fn full_space_unitary<I>(&self, pulses: I) -> DMatrix<C64>
    where
        I: IntoIterator<Item = (SpinPair, f64)>,
    {
        let mut u = DMatrix::<C64>::identity(FULL_DIM, FULL_DIM);
        for (pair, alpha) in pulses {
            let p = singlet_projector_full(pair, &self.qubit_order);
            let g = DMatrix::<C64>::identity(FULL_DIM, FULL_DIM) + p * pulse_coefficient(alpha);
            u = g * u;
        }
        u
    }
}

fn bit_at(state: usize, pos: usize) -> usize {
    (state >> (N_SPINS - 1 - pos)) & 1
}

/// Permutation matrix exchanging the two tensor factors of `pair`.
pub fn swap_permutation(pair: SpinPair, order: &QubitOrder) -> DMatrix<C64> {
    let (a, b) = pair.spins();
    let (pa, pb) = (order.position(a), order.position(b));
    let mut m = DMatrix::<C64>::zeros(FULL_DIM, FULL_DIM);
    for s in 0..FULL_DIM {
        let t = if bit_at(s, pa) != bit_at(s, pb) {
            s ^ (1 << (N_SPINS - 1 - pa)) ^ (1 << (N_SPINS - 1 - pb))
        } else {
            s
        };
        m[(t, s)] = C64::new(1.0, 0.0);
    }
    m
}

fn singlet_projector_full(pair: SpinPair, order: &QubitOrder) -> DMatrix<C64> {
    let id = DMatrix::<C64>::identity(FULL_DIM, FULL_DIM);
    (id - swap_permutation(pair, order)) * C64::new(0.5, 0.0)
}

/// Total `S^2` on the full space: `sum_{i<j} P_ij - 3` for six spins.
pub fn total_spin_squared() -> DMatrix<C64> {
    let order = QubitOrder::identity();
    let mut s2 = DMatrix::<C64>::identity(FULL_DIM, FULL_DIM) * C64::new(-3.0, 0.0);
    for pair in all_pairs() {
        s2 += swap_permutation(pair, &order);
    }
    s2
}

/// Total `S_z` of a computational basis state.
pub fn total_sz(state: usize) -> f64 {
    (0..N_SPINS)
        .map(|p| if bit_at(state, p) == 0 { 0.5 } else { -0.5 })
        .sum()
}

/// Projector onto total spin `s` (`s` in 0..=3) built from `S^2` alone.
fn total_spin_projector(s2: &DMatrix<C64>, s: u32) -> DMatrix<C64> {
    let eig = |k: u32| (k * (k + 1)) as f64;
    let mut p = DMatrix::<C64>::identity(FULL_DIM, FULL_DIM);
    for other in 0..=3u32 {
        if other == s {
            continue;
        }
        let shifted = s2 - DMatrix::<C64>::identity(FULL_DIM, FULL_DIM) * C64::new(eig(other), 0.0);
        p = shifted * p * C64::new(1.0 / (eig(s) - eig(other)), 0.0);
    }
    p
}

/// Three-spin logical states `(|0,+>, |1,+>, |0,->, |1,->)` over bits of
/// spins 1,2,3 (spin 1 most significant).
fn three_spin_states() -> [[f64; 8]; 4] {
    let mut zero = [0.0; 8];
    let mut one = [0.0; 8];
    // |0>_l = (|010> - |100>)/sqrt2, |1>_l = (2|001> - |010> - |100>)/sqrt6
    zero[0b010] = 1.0 / 2f64.sqrt();
    zero[0b100] = -1.0 / 2f64.sqrt();
    one[0b001] = 2.0 / 6f64.sqrt();
    one[0b010] = -1.0 / 6f64.sqrt();
    one[0b100] = -1.0 / 6f64.sqrt();
    let lower = |v: &[f64; 8]| {
        let mut out = [0.0; 8];
        for (s, &amp) in v.iter().enumerate() {
            for k in 0..3 {
                let mask = 1 << (2 - k);
                if s & mask == 0 {
                    out[s | mask] += amp;
                }
            }
        }
        let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.map(|x| x / n)
    };
    let zero_dn = lower(&zero);
    let one_dn = lower(&one);
    [zero, one, zero_dn, one_dn]
}

/// Product state of qubit A (over A1..A3) and qubit B (over B1..B3).
fn product_state(a: &[f64; 8], b: &[f64; 8], order: &QubitOrder) -> DVector<C64> {
    let mut v = DVector::<C64>::zeros(FULL_DIM);
    let place = |bits: usize, spins: [Spin; 3]| -> usize {
        let mut idx = 0;
        for (k, sp) in spins.iter().enumerate() {
            if (bits >> (2 - k)) & 1 == 1 {
                idx |= 1 << (N_SPINS - 1 - order.position(*sp));
            }
        }
        idx
    };
    for (ia, &xa) in a.iter().enumerate() {
        if xa == 0.0 {
            continue;
        }
        for (ib, &xb) in b.iter().enumerate() {
            if xb == 0.0 {
                continue;
            }
            let idx = place(ia, [Spin::A1, Spin::A2, Spin::A3])
                | place(ib, [Spin::B1, Spin::B2, Spin::B3]);
            v[idx] += C64::new(xa * xb, 0.0);
        }
    }
    v
}

/// Gram-Schmidt completion: appends sector vectors `P e_s` (for basis states
/// `s` with the right `S_z`, ascending) until `target_dim` columns exist.
fn complete_basis(
    mut cols: Vec<DVector<C64>>,
    projector: &DMatrix<C64>,
    sz: f64,
    target_dim: usize,
) -> DMatrix<C64> {
    for s in 0..FULL_DIM {
        if cols.len() == target_dim {
            break;
        }
        if (total_sz(s) - sz).abs() > 1e-9 {
            continue;
        }
        let mut v = projector.column(s).into_owned();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / C64::new(n, 0.0));
        }
    }
    assert_eq!(
        cols.len(),
        target_dim,
        "sector completion produced the wrong dimension"
    );
    DMatrix::from_columns(&cols)
}

/// Builds the logical embedding for a given assignment of spins to tensor
/// factors.
///
/// Spin-0 logical states are singlet combinations of the two qubits' `S_z =
/// +-1/2` partners, spin-1 logical states are `|a,+>|b,+>`. Leakage columns are
/// completed deterministically in basis-index order.
pub fn build_logical_embedding(order: QubitOrder) -> LogicalEmbedding {
    let q = three_spin_states();
    let (up, dn) = ((0, 1), (2, 3));
    let mut logical0 = Vec::with_capacity(4);
    let mut logical1 = Vec::with_capacity(4);
    let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    for a in 0..2 {
        for b in 0..2 {
            let a_up = if a == 0 { &q[up.0] } else { &q[up.1] };
            let a_dn = if a == 0 { &q[dn.0] } else { &q[dn.1] };
            let b_up = if b == 0 { &q[up.0] } else { &q[up.1] };
            let b_dn = if b == 0 { &q[dn.0] } else { &q[dn.1] };
            let singlet =
                (product_state(a_up, b_dn, &order) - product_state(a_dn, b_up, &order)) * inv_sqrt2;
            logical0.push(singlet);
            logical1.push(product_state(a_up, b_up, &order));
        }
    }

    let s2 = total_spin_squared_for(&order);
    let basis0 = complete_basis(logical0, &total_spin_projector(&s2, 0), 0.0, DIM_SPIN0);
    let basis1 = complete_basis(logical1, &total_spin_projector(&s2, 1), 1.0, DIM_SPIN1);

    let projectors = all_pairs()
        .map(|pair| {
            let p = singlet_projector_full(pair, &order);
            let r0 = basis0.adjoint() * &p * &basis0;
            let r1 = basis1.adjoint() * &p * &basis1;
            SectorProjector {
                spin0: Matrix5c::from_fn(|i, j| r0[(i, j)]),
                spin1: Matrix9c::from_fn(|i, j| r1[(i, j)]),
            }
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(projectors.len(), N_PAIRS);

    LogicalEmbedding {
        basis0,
        basis1,
        qubit_order: order,
        projectors,
    }
}

// S^2 is invariant under relabeling, the order argument only documents intent.
fn total_spin_squared_for(_order: &QubitOrder) -> DMatrix<C64> {
    total_spin_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: Spin, b: Spin) -> SpinPair {
        SpinPair::new(a, b).unwrap()
    }

    #[test]
    fn sector_dimensions() {
        let emb = LogicalEmbedding::standard();
        assert_eq!(emb.basis0.ncols(), 5);
        assert_eq!(emb.basis1.ncols(), 9);
    }

    #[test]
    fn bases_are_orthonormal() {
        let emb = LogicalEmbedding::standard();
        for b in [&emb.basis0, &emb.basis1] {
            let g = b.adjoint() * b;
            let id = DMatrix::<C64>::identity(b.ncols(), b.ncols());
            assert!((g - id).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn columns_are_spin_eigenvectors() {
        let emb = LogicalEmbedding::standard();
        let s2 = total_spin_squared();
        for (b, s) in [(&emb.basis0, 0.0), (&emb.basis1, 2.0)] {
            for c in b.column_iter() {
                let c = c.into_owned();
                let r = &s2 * &c - &c * C64::new(s, 0.0);
                assert!(r.norm() < 1e-10);
            }
        }
        for c in emb.basis1.column_iter() {
            let sz: f64 = c
                .iter()
                .enumerate()
                .map(|(s, z)| z.norm_sqr() * total_sz(s))
                .sum();
            assert!((sz - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn logical_states_orthonormal() {
        let emb = LogicalEmbedding::standard();
        let c0 = emb.basis0.column(0);
        let c1 = emb.basis0.column(1);
        assert!(c0.dotc(&c1).norm() < 1e-14);
        assert!((c0.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identical_labels_rejected() {
        assert!(matches!(
            SpinPair::new(Spin::A1, Spin::A1),
            Err(Error::InvalidPair(..))
        ));
    }

    #[test]
    fn projector_properties() {
        let emb = LogicalEmbedding::standard();
        let g = emb.swap_generator(pair(Spin::A2, Spin::B3));
        let p = &g.singlet_projector;
        assert!((p * p - p).iter().all(|z| z.norm() < 1e-14));
        assert!((p.adjoint() - p).iter().all(|z| z.norm() < 1e-14));
        assert!((p.trace() - C64::new(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn swap_alpha_zero_and_two_are_identity() {
        let emb = LogicalEmbedding::standard();
        let id = SubspaceUnitaries::identity();
        for p in all_pairs() {
            assert!(emb.swap_alpha(p, 0.0).approx_eq(&id, 1e-12));
            assert!(emb.swap_alpha(p, 2.0).approx_eq(&id, 1e-12));
        }
    }

    #[test]
    fn full_swap_matches_permutation_oracle() {
        // alpha = 1 must reproduce the tensor-factor swap, up to global phase
        let emb = LogicalEmbedding::standard();
        for p in all_pairs() {
            let perm = swap_permutation(p, &emb.qubit_order);
            let oracle = emb.restrict(&perm);
            let got = emb.swap_alpha(p, 1.0);
            let phase0 = (0..5)
                .map(|i| got.spin0[(i, i)] * oracle.spin0[(i, i)].conj())
                .sum::<C64>();
            let phase = phase0 / phase0.norm();
            let scaled = SubspaceUnitaries {
                spin0: oracle.spin0 * phase,
                spin1: oracle.spin1 * phase,
            };
            assert!(got.approx_eq(&scaled, 1e-12), "pair {p}");
        }
    }

    #[test]
    fn logical_column_fast_path_matches_full_product() {
        let emb = LogicalEmbedding::standard();
        let pulses = [
            (pair(Spin::A1, Spin::B1), 0.37),
            (pair(Spin::A2, Spin::A3), 1.2),
            (pair(Spin::B2, Spin::B3), -0.4),
        ];
        let full = emb.pulses_unitary(pulses).logical_columns();
        let fast = emb.pulses_logical_columns(pulses);
        assert!((full.spin0 - fast.spin0).iter().all(|z| z.norm() < 1e-14));
        assert!((full.spin1 - fast.spin1).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn reordered_embedding_is_consistent() {
        let order = QubitOrder::new([2, 1, 0, 3, 4, 5]).unwrap();
        let emb = build_logical_embedding(order);
        let std = LogicalEmbedding::standard();
        // relabeling the factors does not change the physics seen by labels
        let a = emb.swap_alpha(pair(Spin::A1, Spin::A2), 0.3);
        let b = std.swap_alpha(pair(Spin::A1, Spin::A2), 0.3);
        assert!(a
            .spin0
            .iter()
            .zip(b.spin0.iter())
            .all(|(x, y)| (x - y).norm() < 1e-12));
        assert!(QubitOrder::new([0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn pair_slots_are_dense() {
        let mut seen = [false; N_PAIRS];
        for p in all_pairs() {
            assert!(!seen[p.slot()]);
            seen[p.slot()] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
