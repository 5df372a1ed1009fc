//! Point-keyed pseudorandomness.
//!
//! A [`Prf`] maps `(domain, index)` to a 64-bit word by seeking a ChaCha12
//! keystream: the key is expanded from the 64-bit seed, the ChaCha stream id
//! is the domain, and word `index` sits at 32-bit word position `2·index`.
//! Answers therefore depend only on `(seed, domain, index)`, never on the
//! order in which indices are requested.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use num_rational::Ratio;

/// Domain tags separating independent uses of one seed.
pub mod domain {
    pub const MEMBERSHIP: u64 = 1;
    pub const FLIP: u64 = 2;
    pub const SUBSEED: u64 = 3;
    pub const SHIFT_POINT: u64 = 4;
    pub const HIDDEN: u64 = 5;
    pub const ANSWER_A: u64 = 6;
    pub const ANSWER_B: u64 = 7;
    pub const STRATEGY: u64 = 8;
    pub const SAMPLE_POINT: u64 = 9;
}

#[derive(Clone)]
pub struct Prf {
    seed: u64,
    base: ChaCha12Rng,
}

impl std::fmt::Debug for Prf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Prf").field("seed", &self.seed).finish()
    }
}

impl Prf {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            base: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream_at(&self, domain: u64, index: u64) -> ChaCha12Rng {
        let mut rng = self.base.clone();
        rng.set_stream(domain);
        rng.set_word_pos((index as u128) << 1);
        rng
    }

    pub fn word(&self, domain: u64, index: u64) -> u64 {
        self.stream_at(domain, index).next_u64()
    }

    /// Words for indices `start, start + 1, …`, identical to repeated [`Prf::word`] calls.
    pub fn words(&self, domain: u64, start: u64) -> impl Iterator<Item = u64> {
        let mut rng = self.stream_at(domain, start);
        std::iter::repeat_with(move || rng.next_u64())
    }

    /// Independent child seed number `index`.
    pub fn subseed(&self, index: u64) -> u64 {
        self.word(domain::SUBSEED, index)
    }
}

/// `⌊p·2⁶⁴⌋` for `p ∈ [0, 1]`; `None` stands for `p = 1` (always true).
pub fn bernoulli_threshold(p: Ratio<u64>) -> Option<u64> {
    let (num, den) = (*p.numer() as u128, *p.denom() as u128);
    if num >= den {
        return None;
    }
    Some(((num << 64) / den) as u64)
}

/// A Bernoulli(p) draw from one PRF word: `word < ⌊p·2⁶⁴⌋`.
#[inline]
pub fn bernoulli(word: u64, threshold: Option<u64>) -> bool {
    match threshold {
        None => true,
        Some(t) => word < t,
    }
}
