//! Query-bounded testing of additive structure over F₂ⁿ.
//!
//! The crate is organised around exact, bitset-backed set arithmetic
//! ([`gf2`]), counted membership oracles with point-keyed randomness
//! ([`oracle`]), the shift tester ([`shift`]), hard-instance samplers and
//! sham oracles for lower-bound simulation ([`hardness`]), smoothed sumset
//! refutation ([`refute`]) and exhaustive small-n ground truth
//! ([`bruteforce`]).

pub mod bruteforce;
pub mod error;
pub mod gf2;
pub mod hardness;
pub mod oracle;
pub mod prf;
pub mod refute;
pub mod shift;
pub mod stats;

pub use error::{LabError, Result};
pub use gf2::{Gf2Set, Gf2Vector, Rational};
