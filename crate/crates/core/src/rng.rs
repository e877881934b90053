//! Seeded random streams.
//!
//! Every run owns one ChaCha generator per [`StreamPurpose`]. Streams with
//! different purposes never overlap, so drawing contexts or adding
//! instrumentation cannot shift the reward sequence of a run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type BanditRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Rewards = 1,
    Contexts = 2,
    Instance = 3,
    Policy = 4,
}

/// Independent generator for `(seed, purpose)`.
pub fn stream(seed: u64, purpose: StreamPurpose) -> BanditRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
