use std::sync::Arc;

use crate::error::Result;
use crate::gf2::{Gf2Set, Rational};
use crate::prf::{bernoulli, bernoulli_threshold, domain, Prf};

/// Where an oracle's answers come from. All variants are pure functions of
/// the queried point.
#[derive(Clone, Debug)]
pub enum Backend {
    Explicit(Arc<Gf2Set>),
    /// Each point is a member with probability `density`, keyed by `seed`.
    LazyRandom {
        density: Rational,
        seed: u64,
        prf: Prf,
        threshold: Option<u64>,
    },
    /// `base` with each answer flipped with probability `eps`.
    Noisy {
        base: Box<Backend>,
        eps: Rational,
        seed: u64,
        prf: Prf,
        threshold: Option<u64>,
    },
    /// `base + shift`.
    Shifted {
        base: Box<Backend>,
        shift: u64,
    },
    /// `{(0,0,v)} ∪ {(1,0,a)} ∪ {(0,1,b)} ∪ {(1,1,extra)}` where the first two
    /// coordinates are the low two bits.
    Embedded {
        a: Box<Backend>,
        b: Box<Backend>,
        extra: Option<u64>,
    },
}

impl Backend {
    pub(crate) fn lazy_random(density: Rational, seed: u64) -> Self {
        Backend::LazyRandom {
            density,
            seed,
            prf: Prf::new(seed),
            threshold: bernoulli_threshold(density),
        }
    }

    pub(crate) fn noisy(base: Backend, eps: Rational, seed: u64) -> Self {
        Backend::Noisy {
            base: Box::new(base),
            eps,
            seed,
            prf: Prf::new(seed),
            threshold: bernoulli_threshold(eps),
        }
    }

    pub(crate) fn eval(&self, x: u64) -> bool {
        match self {
            Backend::Explicit(set) => set.contains(x),
            Backend::LazyRandom { prf, threshold, .. } => {
                bernoulli(prf.word(domain::MEMBERSHIP, x), *threshold)
            }
            Backend::Noisy {
                base,
                prf,
                threshold,
                ..
            } => base.eval(x) ^ bernoulli(prf.word(domain::FLIP, x), *threshold),
            Backend::Shifted { base, shift } => base.eval(x ^ shift),
            Backend::Embedded { a, b, extra } => {
                let v = x >> 2;
                match x & 3 {
                    0 => true,
                    1 => a.eval(v),
                    2 => b.eval(v),
                    _ => *extra == Some(v),
                }
            }
        }
    }

    /// Fills a `2ⁿ`-point bitmap from a word stream, one draw per point.
    fn from_stream(
        n: u32,
        mut words: impl Iterator<Item = u64>,
        threshold: Option<u64>,
    ) -> Result<Gf2Set> {
        Gf2Set::from_fn(n, |_| bernoulli(words.next().unwrap_or(0), threshold))
    }

    pub(crate) fn materialize(&self, n: u32) -> Result<Gf2Set> {
        match self {
            Backend::Explicit(set) => Ok((**set).clone()),
            Backend::LazyRandom { prf, threshold, .. } => {
                Self::from_stream(n, prf.words(domain::MEMBERSHIP, 0), *threshold)
            }
            Backend::Noisy {
                base,
                prf,
                threshold,
                ..
            } => {
                let flips = Self::from_stream(n, prf.words(domain::FLIP, 0), *threshold)?;
                base.materialize(n)?.symmetric_difference(&flips)
            }
            Backend::Shifted { base, shift } => Ok(base.materialize(n)?.shift_by(*shift)),
            Backend::Embedded { a, b, extra } => {
                let (am, bm) = (a.materialize(n - 2)?, b.materialize(n - 2)?);
                Gf2Set::from_fn(n, |x| {
                    let v = x >> 2;
                    match x & 3 {
                        0 => true,
                        1 => am.contains(v),
                        2 => bm.contains(v),
                        _ => *extra == Some(v),
                    }
                })
            }
        }
    }
}
