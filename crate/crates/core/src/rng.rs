//! Deterministic per-task RNG derivation: a master seed plus a path of
//! indices (pass, trial, repetition, ...) maps to an independent ChaCha8
//! stream, so results are reproducible and order-independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive an independent RNG from `seed` and a path of indices.
pub fn derive_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for &p in path {
        state = splitmix64(state ^ splitmix64(p.wrapping_add(0xa0761d6478bd642f)));
    }
    let mut key = [0u8; 32];
    let mut s = state;
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
