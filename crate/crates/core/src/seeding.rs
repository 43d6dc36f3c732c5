//! Counter-based seed derivation so that every run, generation and
//! instance can be re-created from a master seed and its index alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(parent, stream, index)`.
pub fn derive_seed(parent: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ mix64(stream)).wrapping_add(index))
}

pub fn rng_for(parent: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, stream, index))
}

/// Stream tags.
pub mod stream {
    pub const RUN: u64 = 1;
    pub const INIT: u64 = 2;
    pub const GENERATION: u64 = 3;
    pub const INSTANCE: u64 = 4;
}
