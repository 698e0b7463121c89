//! Deterministic RNG streams.
//!
//! All randomized procedures take a single 64-bit master seed. Independent
//! streams for (trial, coordinate) pairs are derived by a fixed splitting
//! function so that parallel or reordered execution cannot change results:
//! the stream seed is `mix(mix(mix(master) ^ trial) ^ coordinate)` where
//! `mix` is the SplitMix64 finalizer. Each stream is a `ChaCha8Rng`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer: a bijective 64-bit mixer with good avalanche.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of the (trial, coordinate) substream of `master`.
pub fn stream_seed(master: u64, trial: u64, coordinate: u64) -> u64 {
    mix(mix(mix(master) ^ trial) ^ coordinate)
}

/// The RNG for the (trial, coordinate) substream of `master`.
pub fn stream(master: u64, trial: u64, coordinate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, trial, coordinate))
}
