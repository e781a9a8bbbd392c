//! Seeded, platform-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used for every stochastic step of a run.
pub type RunRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}
