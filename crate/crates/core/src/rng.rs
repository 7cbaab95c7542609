//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`Stream`] keyed by
//! `(master_seed, purpose, indices...)`. The key is folded into a 64-bit
//! seed with the SplitMix64 finalizer:
//!
//! ```text
//! h = splitmix64(master_seed)
//! h = splitmix64(h ^ purpose)
//! for i in indices { h = splitmix64(h ^ i) }
//! ```
//!
//! and the seed initializes a ChaCha8 generator via `seed_from_u64`.
//! Streams for different keys are statistically independent, so trials can
//! run on any number of workers and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// What a stream is used for. The discriminant enters the seed derivation
/// and must stay stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channel = 1,
    Inputs = 2,
    ArtificialNoise = 3,
    ReceiverNoise = 4,
    Selection = 5,
    Empirical = 6,
}

/// SplitMix64 (Steele, Lea and Flood 2014), used as an integer hash.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, purpose: Purpose, indices: &[u64]) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ purpose as u64);
    for &i in indices {
        h = splitmix64(h ^ i);
    }
    h
}

pub fn stream(master_seed: u64, purpose: Purpose, indices: &[u64]) -> Stream {
    Stream::seed_from_u64(derive_seed(master_seed, purpose, indices))
}

/// Maps a 64-bit hash to `[0, 1)` using its top 53 bits.
pub fn unit_interval(hash: u64) -> f64 {
    (hash >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
