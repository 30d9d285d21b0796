//! Counter-based random draws.
//!
//! Every random quantity in a realization is a pure function of
//! `(seed, stream, key)`, where `key` is a canonical point index or an
//! unordered index pair. Draw order and thread scheduling never matter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent random streams used by the model builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Site = 1,
    Bond = 2,
    Potential = 3,
    Perturbation = 4,
}

/// Uniform draw in `[0, 1)` for `(seed, stream, key)`.
pub fn uniform(seed: u64, stream: Stream, key: u128) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    // each u64 consumes two 32-bit words
    rng.set_word_pos(key.wrapping_mul(2));
    rng.random::<f64>()
}

/// Canonical key of an unordered index pair.
pub fn pair_key(i: usize, j: usize) -> u128 {
    let (lo, hi) = if i <= j { (i as u128, j as u128) } else { (j as u128, i as u128) };
    hi * (hi + 1) / 2 + lo
}
