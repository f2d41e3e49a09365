//! Seeded random streams.
//!
//! Every consumer of randomness in a run gets its own ChaCha stream: the key
//! is the run seed and the stream id names the consumer. ChaCha is counter
//! based, so streams never overlap and a consumer's draws do not depend on how
//! much randomness any other consumer used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub mod streams {
    pub const ENV: u64 = 1;
    pub const ENV_AUX: u64 = 2;
    pub const EXPLORATION: u64 = 3;
    pub const INIT: u64 = 4;
    pub const REPLAY: u64 = 5;
    pub const LAMBDA: u64 = 6;
    /// Arm `i` of a bandit uses stream ids `ARM_BASE + 16 * i + k`.
    pub const ARM_BASE: u64 = 1 << 20;
}

pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream `k` reserved for arm `arm`.
pub fn arm_stream(seed: u64, arm: usize, k: u64) -> StreamRng {
    debug_assert!(k < 16);
    stream(seed, streams::ARM_BASE + 16 * arm as u64 + k)
}
