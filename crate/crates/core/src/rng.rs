//! Seeded random-number streams.
//!
//! Every source of randomness in a run is derived from one user-facing seed.
//! Each consumer (initial sampling, mutation, tie-breaking, ...) gets its own
//! named stream so that adding draws to one consumer never shifts the values
//! another consumer sees. Streams use ChaCha8, which is stable across
//! platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive the substream rng for `name` from the run seed.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name.as_bytes()))
}

/// FNV-1a, 64-bit. Used instead of `DefaultHasher` because the stdlib hasher
/// is allowed to change between releases and stream derivation must not.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
