//! Seed derivation for independent, order-insensitive RNG streams.
//!
//! Every stochastic step (breeding a generation, evaluating one individual,
//! running one sweep trial) draws from its own ChaCha8 stream whose seed is
//! a hash of the master seed and the step's coordinates, so results do not
//! depend on the order in which parallel work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}

/// Stream tags keep the coordinate spaces of different consumers apart.
pub mod tag {
    pub const INIT: u64 = 1;
    pub const BREED: u64 = 2;
    pub const EVALUATE: u64 = 3;
    pub const SWEEP: u64 = 4;
    pub const TEMPLATE: u64 = 5;
}
