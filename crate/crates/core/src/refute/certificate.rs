use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bruteforce::{find_root, BRUTEFORCE_MAX_DIM};
use crate::error::{LabError, Result};
use crate::gf2::{mask, sumset, Gf2Set, Gf2Vector, Rational};
use crate::oracle::OracleHandle;
use crate::prf::{domain, Prf};

/// Largest dimension for the pruned consistency check.
pub const PRUNED_MAX_DIM: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateMeta {
    pub n: u32,
    pub d: u32,
    pub m: u64,
    pub seed: u64,
    /// Oracle calls made while building: `2^d + m`.
    pub queries: u64,
}

/// Distinct queried points with their observed labels. The first `2^d`
/// points are `V = span(e₁, …, e_d)` in ascending order; the rest are the
/// random points not already present, in draw order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub points: Vec<Gf2Vector>,
    pub labels: Vec<bool>,
    pub meta: CertificateMeta,
}

/// `⌈n/2 + 1.5·log₂(n/ε)⌉`, clamped to `[1, n]`.
pub fn default_subspace_dim(n: u32, eps: Rational) -> u32 {
    let ratio = n as f64 * *eps.denom() as f64 / *eps.numer() as f64;
    let d = (n as f64 / 2.0 + 1.5 * ratio.log2()).ceil();
    (d.max(1.0) as u32).min(n)
}

/// `⌈(2/ε)·2^(n−d)·c·n³/ε²⌉` computed exactly.
pub fn random_point_count(n: u32, d: u32, eps: Rational, c: Rational) -> Result<u64> {
    let (p, q) = (*eps.numer() as u128, *eps.denom() as u128);
    let (cn, cd) = (*c.numer() as u128, *c.denom() as u128);
    let too_big = || LabError::invalid("m", "random point count overflows");
    let num = 2u128
        .checked_mul(1u128.checked_shl(n - d).ok_or_else(too_big)?)
        .and_then(|x| x.checked_mul(cn))
        .and_then(|x| x.checked_mul((n as u128).pow(3)))
        .and_then(|x| x.checked_mul(q.pow(3)))
        .ok_or_else(too_big)?;
    let den = cd * p.pow(3);
    u64::try_from(num.div_ceil(den)).map_err(|_| too_big())
}

/// Queries all of `V = span(e₁, …, e_d)` and `m` uniform points on `oracle`.
/// `d = None` picks [`default_subspace_dim`]; `c` is the constant in `m`.
pub fn build_certificate(
    oracle: &mut OracleHandle,
    d: Option<u32>,
    eps: Rational,
    seed: u64,
    c: Rational,
) -> Result<Certificate> {
    let n = oracle.dim();
    if *eps.numer() == 0 || eps > Rational::new(1, 2) {
        return Err(LabError::invalid("eps", format!("{eps} is outside (0, 1/2]")));
    }
    let d = d.unwrap_or_else(|| default_subspace_dim(n, eps));
    if d == 0 || d > n {
        return Err(LabError::invalid("d", format!("{d} is outside [1, {n}]")));
    }
    if d > 30 {
        return Err(LabError::capacity("certificate subspace", d, 30));
    }
    let m = random_point_count(n, d, eps, c)?;
    let before = oracle.queries();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for x in 0..(1u64 << d) {
        points.push(Gf2Vector::new(n, x)?);
        labels.push(oracle.query_bits(x)?);
    }
    let prf = Prf::new(seed);
    let mut seen: HashSet<u64> = HashSet::new();
    for (i, w) in prf.words(domain::SAMPLE_POINT, 0).take(m as usize).enumerate() {
        let _ = i;
        let x = w & mask(n);
        let answer = oracle.query_bits(x)?;
        if x >> d != 0 && seen.insert(x) {
            points.push(Gf2Vector::new(n, x)?);
            labels.push(answer);
        }
    }
    Ok(Certificate {
        points,
        labels,
        meta: CertificateMeta {
            n,
            d,
            m,
            seed,
            queries: oracle.queries() - before,
        },
    })
}

impl Certificate {
    /// Builds a certificate from explicit points and labels (points must be
    /// distinct and begin with `span(e₁, …, e_d)` in ascending order).
    pub fn from_parts(n: u32, d: u32, points: Vec<u64>, labels: Vec<bool>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(LabError::invalid("labels", "length differs from points"));
        }
        if d > n || points.len() < 1usize << d || (0..1u64 << d).any(|x| points[x as usize] != x) {
            return Err(LabError::invalid("points", "must begin with the coordinate subspace"));
        }
        let mut seen = HashSet::new();
        if !points.iter().all(|p| seen.insert(*p)) {
            return Err(LabError::invalid("points", "must be distinct"));
        }
        let vectors = points.iter().map(|&p| Gf2Vector::new(n, p)).collect::<Result<_>>()?;
        let q = points.len() as u64;
        Ok(Self {
            points: vectors,
            labels,
            meta: CertificateMeta {
                n,
                d,
                m: q - (1 << d),
                seed: 0,
                queries: q,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Labeled points as `(members, non-members)` over F₂ⁿ (requires `n ≤ 28`).
    pub fn label_sets(&self) -> Result<(Gf2Set, Gf2Set)> {
        let n = self.meta.n;
        let mut yes = Gf2Set::empty(n)?;
        let mut no = Gf2Set::empty(n)?;
        for (p, &l) in self.points.iter().zip(&self.labels) {
            if l {
                yes.insert(p.bits())?;
            } else {
                no.insert(p.bits())?;
            }
        }
        Ok((yes, no))
    }

    /// Members of `V`, indexed by the first `d` coordinates.
    pub fn subspace_members(&self) -> Result<Gf2Set> {
        let d = self.meta.d;
        let mut out = Gf2Set::empty(d)?;
        for (p, &l) in self.points[..1 << d].iter().zip(&self.labels) {
            if l {
                out.insert(p.bits())?;
            }
        }
        Ok(out)
    }

    /// True iff `sumset(a)` agrees with every label.
    pub fn agrees_with(&self, a: &Gf2Set) -> bool {
        let s = sumset(a);
        self.points
            .iter()
            .zip(&self.labels)
            .all(|(p, &l)| s.contains(p.bits()) == l)
    }

    /// The set text format with a label column: `gf2set n=<n>`, then `<hex> <0|1>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("gf2set n={}\n", self.meta.n);
        for (p, &l) in self.points.iter().zip(&self.labels) {
            let _ = writeln!(out, "{:x} {}", p.bits(), l as u8);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum CheckOutcome {
    /// No sumset agrees with the labels.
    Refuted,
    /// `root + root` agrees with the labels.
    Consistent { root: Gf2Set },
    /// The pruned search ran out of nodes.
    Unknown { nodes: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// Every root of F₂ⁿ, `n ≤ 4`.
    Exact,
    /// Coset decomposition over `V` with a node budget, `n ≤ 8`.
    Pruned { node_budget: u64 },
}

/// Decides whether `cert` is a sumset 0-certificate for its labels.
pub fn check_zero_certificate(cert: &Certificate, mode: CheckMode) -> Result<CheckOutcome> {
    let n = cert.meta.n;
    match mode {
        CheckMode::Exact => {
            if n > BRUTEFORCE_MAX_DIM {
                return Err(LabError::capacity("exact certificate check", n, BRUTEFORCE_MAX_DIM));
            }
            let (yes, no) = cert.label_sets()?;
            let (yes, seen) = (yes.words()[0], yes.words()[0] | no.words()[0]);
            Ok(match find_root(n, |sums| sums & seen == yes)? {
                Some(root) => CheckOutcome::Consistent {
                    root: Gf2Set::from_words(n, vec![root])?,
                },
                None => CheckOutcome::Refuted,
            })
        }
        CheckMode::Pruned { node_budget } => {
            if n > PRUNED_MAX_DIM {
                return Err(LabError::capacity("pruned certificate check", n, PRUNED_MAX_DIM));
            }
            super::pruned::check(cert, node_budget)
        }
    }
}
