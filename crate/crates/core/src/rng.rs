//! Seeded, splittable randomness.
//!
//! All stochastic routines draw from ChaCha streams addressed by
//! `(seed, stream)`. Work is split into fixed-size chunks, each chunk owning
//! its own stream, so results do not depend on how chunks are scheduled.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;

pub type Rng = ChaCha8Rng;

/// Samples processed per stream when sampling work is chunked.
pub const CHUNK: u64 = 4096;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for a named sub-task, e.g. restart `i`.
pub fn derive(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Chunk boundaries `(stream index, len)` covering `total` samples.
pub fn chunks(total: u64) -> impl Iterator<Item = (u64, u64)> {
    let count = total.div_ceil(CHUNK);
    (0..count).map(move |c| (c, CHUNK.min(total - c * CHUNK)))
}

/// A uniform string of length `len`.
pub fn bits(r: &mut Rng, len: usize) -> BitString {
    let mut word = 0u64;
    BitString::from_bits((0..len).map(|i| {
        if i % 64 == 0 {
            word = r.random();
        }
        (word >> (i % 64)) & 1 == 1
    }))
}
