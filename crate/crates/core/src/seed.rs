//! Seed discipline.
//!
//! A run's base seed is expanded into independent substreams by hashing
//! `(base, label, index)` with the SplitMix64 finalizer:
//!
//! ```text
//! mix64(z)  = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!             z ^= z >> 27; z *= 0x94d049bb133111eb;
//!             z ^ (z >> 31)
//! derive(b, l, i) = mix64(mix64(mix64(b) ^ tag(l)) ^ (i * 0x9e3779b97f4a7c15))
//! ```
//!
//! Each substream seeds its own ChaCha8 generator, so changing how many draws
//! one component makes never perturbs another component's stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every substream.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Named substreams. The discriminant is part of the hash input and must not
/// change between releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Workload = 2,
    TieBreak = 3,
    Voronoi = 4,
    Replication = 5,
}

impl Stream {
    fn tag(self) -> u64 {
        // distinct odd constants keep labels far apart after mixing
        (self as u64).wrapping_mul(0xd6e8_feb8_6659_fd93) | 1
    }
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of substream `(label, index)` from `base`.
pub fn derive(base: u64, label: Stream, index: u64) -> u64 {
    mix64(mix64(mix64(base) ^ label.tag()) ^ index.wrapping_mul(GOLDEN))
}

/// Generator for a seed produced by [`derive`] (or any raw seed).
pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Shorthand for `rng(derive(base, label, index))`.
pub fn substream(base: u64, label: Stream, index: u64) -> SimRng {
    rng(derive(base, label, index))
}
