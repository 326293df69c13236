//! Deterministic random sources.
//!
//! Every random routine in the crate takes an explicit `u64` seed. Work that
//! may run in parallel (optimizer restarts, distillation groups) draws from
//! independent ChaCha streams keyed by `(seed, index)`, so results do not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
