//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sprice_core::equilibrium::Economy;
use sprice_core::filtration::{EventTree, RawProcess};
use sprice_core::sample;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random economy with a fixed seed.
pub fn economy(seed: u64, agents: usize, steps: usize) -> Economy {
    sample::random_economy(&mut rng(seed), agents, steps, 3)
}

pub fn tree_and_process(seed: u64, steps: usize) -> (EventTree, RawProcess) {
    let mut r = rng(seed);
    let tree = sample::random_tree_with_steps(&mut r, steps, 3);
    let xi = sample::random_raw_process(&mut r, &tree);
    (tree, xi)
}
