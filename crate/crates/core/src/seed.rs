//! Deterministic seed derivation for parallel Monte Carlo.
//!
//! Every random stage of a simulation (wind path, receiver noise, payload
//! data, one stream per sweep point and trial) gets its own seed derived
//! from the master seed and a list of stream indices. Derivation is a
//! splittable counter construction built on SplitMix64, so the same
//! (master, indices) pair always yields the same generator regardless of
//! execution order or thread count.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// Stream tag for wind-path sampling.
pub const STREAM_WIND: u64 = 1;
/// Stream tag for receiver noise.
pub const STREAM_NOISE: u64 = 2;
/// Stream tag for payload symbol generation.
pub const STREAM_SYMBOLS: u64 = 3;

/// SplitMix64 finalizer (Vigna). Full 64-bit avalanche, bijective.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a stream path such as
/// `[STREAM_WIND, point_index, trial_index]`.
pub fn derive_seed(master: u64, stream: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0xa0761d6478bd642f);
    for &word in stream {
        h = splitmix64(h ^ word.wrapping_mul(0x9e3779b97f4a7c15));
    }
    h
}

/// Counter-based generator for a derived stream.
pub fn rng_for(master: u64, stream: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, stream))
}
