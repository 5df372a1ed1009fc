//! Exact arithmetic over F₂ⁿ.
//!
//! Coordinate 1 of a vector is stored in the least-significant bit, so the
//! vector `(x₁, …, xₙ)` has integer value `Σ xᵢ·2^(i-1)`. Sets are explicit
//! `2ⁿ`-bit maps indexed by that value.

mod cayley;
mod format;
mod set;
mod subspace;
mod vector;
pub mod wht;

pub use cayley::{is_independent, CayleyGraph};
pub use format::is_text_format;
pub use set::{dist, sumset, Gf2Set, MAX_SET_DIM};
pub use subspace::{decompose, HalfSpacePair, Subspace};
pub(crate) use vector::{check_vector_dim, mask};
pub use vector::{Gf2Vector, MAX_VECTOR_DIM};

use crate::error::{LabError, Result};
use num_rational::Ratio;

/// Exact non-negative rational, used for distances, volumes and ε.
pub type Rational = Ratio<u64>;

/// `num / 2^shift` as a reduced rational.
pub(crate) fn dyadic(num: u64, shift: u32) -> Rational {
    Ratio::new(num, 1u64 << shift)
}

/// Binary entropy `H(x) = -x log₂ x - (1-x) log₂(1-x)` with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(LabError::invalid("x", format!("{x} is outside [0, 1]")));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// `Vol_{b₁b₂}(S)`: the density of `S` on the coset `{x : x₁ = b₁, x₂ = b₂}`.
pub fn vol(s: &Gf2Set, b1: bool, b2: bool) -> Result<Rational> {
    if s.dim() < 2 {
        return Err(LabError::invalid(
            "set",
            "volume needs dimension at least 2",
        ));
    }
    Ok(dyadic(s.coset_count(b1, b2), s.dim() - 2))
}
