//! Seeding rules shared by every stochastic routine.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), which has a
//! platform-independent output stream. A `(seed, stream)` pair selects an
//! independent substream: the 64-bit seed is expanded to the 256-bit key via
//! `seed_from_u64`, and `stream` is passed to `set_stream`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used by the crate, so the same master seed never feeds two
/// consumers the same substream.
pub mod streams {
    pub const MTM: u64 = 1;
    pub const DATA: u64 = 2;
    pub const CHAIN: u64 = 3;
    pub const MFM: u64 = 4;
}

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for item `index` of a run keyed by `master`:
/// `splitmix64(splitmix64(master) ^ index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}
