//! Shared inputs for the benchmarks.

use eoswap::{Layout, Problem, Reference, Structure, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The FW search problem: LINEAR_11, seven bricks, CNOT.
pub fn fw_problem() -> Problem {
    Problem::new(Layout::linear11(), Structure::five_brick(), Target::Cnot).expect("valid problem")
}

/// FW alphas with uniform noise of half-width `eps`.
pub fn perturbed_fw(eps: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Reference::FwCnot
        .sequence()
        .alphas()
        .into_iter()
        .map(|a| a + rng.random_range(-eps..=eps))
        .collect()
}
