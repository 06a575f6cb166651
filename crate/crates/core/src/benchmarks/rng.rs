//! Seeded random streams for the generators.
//!
//! Every generator draws from ChaCha20 keyed by `seed_from_u64(seed)`.
//! Independent pieces of an instance use distinct stream ids:
//! `stream = 16 * attempt + component`, where `attempt` counts
//! regenerations and `component` is one of the constants below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Data matrices and vectors.
pub const DATA: u64 = 0;
/// Starting point.
pub const START: u64 = 1;
/// Slater point used to build a feasible right-hand side.
pub const INTERIOR: u64 = 2;
/// Sparsity patterns.
pub const PATTERN: u64 = 3;

pub fn stream(seed: u64, attempt: u64, component: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(16 * attempt + component);
    rng
}

/// Draw from `U[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn uniform_vec(rng: &mut impl Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| uniform(rng, lo, hi)).collect()
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}
