//! Sources of randomness consumed by an episode.
//!
//! Episodes only ever ask for two things: a noise draw and a uniform choice
//! among `n` alternatives (used for phase permutations). Monte Carlo runs back
//! both with a seeded stream; the exact enumerator backs them with a tape of
//! recorded choices so every path can be replayed.

use rand::Rng;

use crate::env::{sample_noise, NoiseModel};

pub trait Source {
    fn noise(&mut self, model: &NoiseModel) -> f64;

    /// Uniform index in `0..n`, `n >= 1`.
    fn choose(&mut self, n: usize) -> usize;
}

/// Source backed by a random stream.
#[derive(Debug)]
pub struct RngSource<R>(pub R);

impl<R: Rng> Source for RngSource<R> {
    fn noise(&mut self, model: &NoiseModel) -> f64 {
        sample_noise(model, &mut self.0)
    }

    fn choose(&mut self, n: usize) -> usize {
        if n <= 1 {
            0
        } else {
            self.0.random_range(0..n)
        }
    }
}

/// Fisher-Yates shuffle driven by `source`; every permutation is equally likely.
pub fn shuffle<S: Source + ?Sized>(items: &mut [usize], source: &mut S) {
    for i in (1..items.len()).rev() {
        let j = source.choose(i + 1);
        items.swap(i, j);
    }
}
