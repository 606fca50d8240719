//! Counter-based random draws keyed by `(seed, stream, index)`.
//!
//! Every draw is a pure function of its key: a ChaCha8 keystream selected by
//! `seed` and `stream`, read at a word offset fixed by `index`. Results do not
//! depend on call order or thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32-bit words consumed per draw: two u64 values.
const WORDS_PER_DRAW: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedRng {
    seed: u64,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        KeyedRng { seed }
    }

    fn words(&self, stream: u64, index: u64) -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(index) * WORDS_PER_DRAW);
        (rng.next_u64(), rng.next_u64())
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform(&self, stream: u64, index: u64) -> f64 {
        to_open_unit(self.words(stream, index).0)
    }

    /// Standard normal draw by the Box-Muller transform.
    pub fn standard_normal(&self, stream: u64, index: u64) -> f64 {
        let (a, b) = self.words(stream, index);
        let u1 = to_open_unit(a);
        let u2 = to_open_unit(b);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Maps the top 53 bits to the midpoint grid of (0, 1).
fn to_open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
