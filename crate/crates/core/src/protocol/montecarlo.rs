use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::engine::RunSeed;
use crate::error::Result;

/// Generator for run `run` of a batch seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    RunSeed::new(seed, run).rng()
}

/// Executes `runs` independent runs in parallel. Run `i` gets stream `i` of
/// `seed`, and results come back in run order, so the output does not depend
/// on scheduling.
pub fn run_many<T, F>(seed: u64, runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RunSeed) -> Result<T> + Sync,
{
    (0..runs as u64)
        .into_par_iter()
        .map(|i| f(RunSeed::new(seed, i)))
        .collect()
}
