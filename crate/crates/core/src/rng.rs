//! Seeded random number generation.
//!
//! Every randomized routine draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, so a given seed reproduces the same stream on
//! every platform. Parallel work derives one stream per task with
//! [`task_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent task spawned from `seed`.
pub fn task_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Uniform draw from the closed interval `[lo, hi]`; returns `lo` when the
/// interval is degenerate.
pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng as _;
    if hi <= lo {
        return lo;
    }
    lo + (hi - lo) * rng.random::<f64>()
}
