//! Portable seeded generator shared by the ensemble learners and the
//! bootstrap.
//!
//! SplitMix64:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15          (mod 2^64)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform floats take the top 53 bits (`(out >> 11) * 2^-53`, in `[0, 1)`).
//! Integers in `0..n` use the multiply-high map `(out * n) >> 64`.
//! Independent substreams are seeded with `mix64(seed ^ mix64(index + 1))`,
//! where `mix64` is the output finalizer above applied to its argument.

use rand_core::{Rng, SeedableRng};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer: the first output of a generator whose
/// state is `z - GAMMA`.
pub fn mix64(z: u64) -> u64 {
    rand_xoshiro::SplitMix64::seed_from_u64(z.wrapping_sub(GAMMA)).next_u64()
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    inner: rand_xoshiro::SplitMix64,
}

impl SplitMix64 {
    /// Generator whose initial state is `seed`.
    pub fn new(seed: u64) -> Self {
        Self { inner: rand_xoshiro::SplitMix64::seed_from_u64(seed) }
    }

    /// Generator for substream `index` of `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(mix64(seed ^ mix64(index.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle, drawing `below(i + 1)` for `i = len-1 .. 1`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
