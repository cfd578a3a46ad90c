use eoswap::objective::EXACT_EPS;
use eoswap::references::{p2, Reference};
use eoswap::{d_cz, d_fw, timing, transform_invert, LayoutKind, Structure, Target};

fn distance(r: Reference) -> f64 {
    let us = r.sequence().unitary();
    match r.target() {
        Target::Cnot => d_fw(&us),
        Target::Cz => d_cz(&us),
    }
}

#[test]
fn every_reference_is_exact() {
    for r in Reference::ALL {
        let d = distance(r);
        assert!(d < EXACT_EPS, "{r}: d = {d:e}");
    }
}

#[test]
fn fw_timing() {
    let t = timing(&Reference::FwCnot.sequence());
    assert!((t.t_sequential - 24.0).abs() < 1e-9);
    assert!((t.t_parallel - (16.0 - p2())).abs() < 1e-12);
    assert_eq!(t.n_time_steps, 13);
    assert_eq!(t.n_pulses_nonzero, 22);
}

#[test]
fn inverse_fw_is_the_inverted_fw() {
    let fw = Reference::FwCnot.sequence();
    let inv = transform_invert(&fw);
    assert_eq!(inv.structure(), Structure::FiveBrick(7));
    let bundled = Reference::InverseFwCnot.sequence();
    for (a, b) in inv.alphas().iter().zip(bundled.alphas()) {
        assert!((a - b).abs() < 1e-12);
    }
    let t = timing(&bundled);
    assert!((t.t_sequential - 20.0).abs() < 1e-9);
    assert!((t.t_parallel - 13.89).abs() < 0.01);
}

#[test]
fn cz_references() {
    let t = timing(&Reference::CzA.sequence());
    assert!((t.t_parallel - 11.5).abs() < 1e-12);
    assert!((t.t_sequential - 16.0).abs() < 1e-12);
    let inv = transform_invert(&Reference::CzA.sequence());
    let b = Reference::CzB.sequence();
    assert_eq!(inv.alphas().len(), b.alphas().len());
    for (x, y) in inv.alphas().iter().zip(b.alphas()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn linear33_references() {
    for (r, ts) in [
        (Reference::Linear33Rl, 24.0),
        (Reference::Linear33Weinstein, 26.0),
    ] {
        let seq = r.sequence();
        assert_eq!(seq.layout().kind(), LayoutKind::Linear33);
        assert!((timing(&seq).t_sequential - ts).abs() < 1e-9, "{r}");
    }
}
