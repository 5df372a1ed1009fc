//! Refuting sumset membership of smoothed sets: certificates, consistency
//! checks, root-count bounds, family filtering and independence numbers.

mod alpha;
mod certificate;
mod pruned;
mod roots;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, LabError, Result};
use crate::gf2::{mask, Gf2Set, Rational};
use crate::oracle::OracleHandle;
use crate::prf::{domain, Prf};

pub use alpha::{
    independence_number, independence_number_with_budget, AlphaMode, AlphaResult, ALPHA_EXACT_MAX_DIM, ALPHA_EXACT_MAX_VERTICES,
    ALPHA_GREEDY_MAX_DIM,
};
pub use certificate::{
    build_certificate, check_zero_certificate, default_subspace_dim, random_point_count, Certificate,
    CertificateMeta, CheckMode, CheckOutcome, PRUNED_MAX_DIM,
};
pub use roots::{
    consistent_root_bound, Bound, RootFamily, MAX_LISTED_CANDIDATES, ROOT_BOUND_CONSTANT, ROOT_BOUND_MAX_DIM,
};

/// Largest dimension for [`greedy_many_sums`].
pub const MANY_SUMS_MAX_DIM: u32 = 20;

/// `⌈(2/ε)·ln k⌉`.
pub fn filter_query_count(family_size: usize, eps: Rational) -> u64 {
    let e = *eps.numer() as f64 / *eps.denom() as f64;
    (2.0 / e * (family_size as f64).ln()).ceil().max(0.0) as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    /// Indices into the family, ascending.
    pub survivors: Vec<usize>,
    pub queries: u64,
}

/// Queries `⌈(2/ε)·ln |family|⌉` uniform points and keeps the members that
/// agree with `oracle` on all of them.
pub fn family_filter(oracle: &mut OracleHandle, family: &[Gf2Set], eps: Rational, seed: u64) -> Result<FilterOutcome> {
    if family.is_empty() {
        return Err(LabError::invalid("family", "must be nonempty"));
    }
    if *eps.numer() == 0 || eps > Rational::from_integer(1) {
        return Err(LabError::invalid("eps", format!("{eps} is outside (0, 1]")));
    }
    let n = oracle.dim();
    for f in family {
        check_same_dim(n, f.dim())?;
    }
    let queries = filter_query_count(family.len(), eps);
    let prf = Prf::new(seed);
    let mut alive = vec![true; family.len()];
    for w in prf.words(domain::SAMPLE_POINT, 0).take(queries as usize) {
        let x = w & mask(n);
        let answer = oracle.query_bits(x)?;
        for (keep, f) in alive.iter_mut().zip(family) {
            *keep &= f.contains(x) == answer;
        }
    }
    Ok(FilterOutcome {
        survivors: alive.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect(),
        queries,
    })
}

/// A subset `A′ ⊆ A` with many sums: start from the least element and, while
/// some `x ∈ A ∖ A′` (least first) has `2·|(A′ + x) ∖ (A′ + A′)| ≥ |A′| + 1`,
/// add it.
pub fn greedy_many_sums(a: &Gf2Set) -> Result<Gf2Set> {
    let n = a.dim();
    if n > MANY_SUMS_MAX_DIM {
        return Err(LabError::capacity("greedy many sums", n, MANY_SUMS_MAX_DIM));
    }
    let start = a.first().ok_or_else(|| LabError::invalid("a", "must be nonempty"))?;
    let mut chosen = vec![start];
    let mut out = Gf2Set::empty(n)?;
    out.insert(start)?;
    let mut sums = Gf2Set::empty(n)?;
    sums.insert(0)?;
    'grow: loop {
        for x in a.iter() {
            if out.contains(x) {
                continue;
            }
            let fresh = chosen.iter().filter(|&&c| !sums.contains(c ^ x)).count();
            if 2 * fresh > chosen.len() {
                for &c in &chosen {
                    sums.insert(c ^ x)?;
                }
                chosen.push(x);
                out.insert(x)?;
                continue 'grow;
            }
        }
        return Ok(out);
    }
}
