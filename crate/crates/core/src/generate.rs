//! Seeded random test objects.
//!
//! Every generator is a `ChaCha8Rng` seeded with `seed_from_u64`, whose output
//! is fixed across platforms and releases of `rand_chacha`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filtration::cond_expectation_at;
use crate::martingale::{close_martingale, DiscreteMartingale, PredictableIntegrand};
use crate::space::{DyadicSpace, RandomVariable};

/// Seed used when none is given ("dymart" in ASCII).
pub const DEFAULT_SEED: u64 = 0x6479_6d61_7274;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `index` in a run started from `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}

/// Values drawn uniformly from `[-1, 1)`.
pub fn random_variable(space: DyadicSpace, seed: u64) -> RandomVariable {
    let mut rng = rng(seed);
    RandomVariable::from_fn(space, |_| rng.gen_range(-1.0..1.0)).expect("finite draws")
}

/// `close_martingale` of a uniform random terminal.
pub fn random_martingale(space: DyadicSpace, seed: u64) -> DiscreteMartingale {
    close_martingale(&random_variable(space, seed))
}

/// `H_j = E(G_j | C^j)` for independent uniform `G_j`, so each slice is
/// exactly constant on level-`j` cells.
pub fn random_integrand(space: DyadicSpace, seed: u64) -> PredictableIntegrand {
    let mut rng = rng(seed);
    let slices = (0..space.depth())
        .map(|j| {
            let g = RandomVariable::from_fn(space, |_| rng.gen_range(-1.0..1.0)).expect("finite draws");
            cond_expectation_at(&g, j).expect("level within depth")
        })
        .collect();
    PredictableIntegrand::new(slices).expect("block averages are predictable")
}
