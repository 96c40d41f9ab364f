//! Platform-stable random streams.
//!
//! Streams are ChaCha8 keyed through `SeedableRng::seed_from_u64`. Draws are
//! derived from raw `u64` words as follows, independent of any `rand`
//! distribution code:
//!
//! * unit interval: the top 53 bits scaled by `2^-53`, giving `[0, 1)`;
//! * integer range `[lo, hi]`: rejection sampling. Words below
//!   `2^64 mod span` are discarded, the rest are reduced modulo `span`.
//!
//! Per-file streams use `mix_seed(master, index)`, a SplitMix64 finalizer
//! applied to `master ^ splitmix64(index)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function for a single state word.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream that belongs to input number `index`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Source of uniform draws used by the augmentation policies.
pub trait UniformSource {
    fn next_word(&mut self) -> u64;

    /// Uniform in `[0, 1)`.
    fn unit(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform over the integers `lo..=hi`.
    fn int_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let span = u64::from(hi - lo) + 1;
        let reject_below = span.wrapping_neg() % span;
        loop {
            let word = self.next_word();
            if word >= reject_below {
                return lo + (word % span) as u32;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for input `index` under `master`.
    pub fn for_input(master: u64, index: u64) -> Self {
        Self::new(mix_seed(master, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl UniformSource for SeededRng {
    fn next_word(&mut self) -> u64 {
        self.stream.next_u64()
    }
}
