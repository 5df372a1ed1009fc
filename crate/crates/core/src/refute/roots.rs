use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::gf2::{Gf2Set, Rational};

/// Largest subspace dimension accepted by [`consistent_root_bound`].
pub const ROOT_BOUND_MAX_DIM: u32 = 12;

/// Candidate lists are materialized only up to this many sets per coset.
pub const MAX_LISTED_CANDIDATES: u64 = 4096;

/// Shipped value of the constant in `log₂(bound) ≤ 2^(n−d)·C·n³/ε²`.
pub const ROOT_BOUND_CONSTANT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Bound {
    Exact(u128),
    /// Beyond `2^64`.
    Overflow,
}

/// Roots consistent with the labels on `V`, coset by coset.
///
/// Every coset of `V` admits the same candidates: the independent sets of
/// `Γ_V(K)` (or only `∅` when `0 ∈ K`), so one list serves all `2^(n−d)` cosets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootFamily {
    pub n: u32,
    pub d: u32,
    /// `K`: points of `V` labeled as non-members.
    pub excluded: Gf2Set,
    pub cosets: u64,
    /// Candidates per coset, saturating at `u128::MAX`.
    pub per_coset: u128,
    /// The candidates themselves, when there are at most [`MAX_LISTED_CANDIDATES`].
    pub candidates: Option<Vec<Gf2Set>>,
    /// `per_coset^cosets`.
    pub bound: Bound,
    pub log2_bound: f64,
    /// `log2_bound / (2^(n−d)·n³/ε²)`.
    pub calibration: f64,
    /// The count stopped early; `per_coset` is then a lower bound.
    pub budget_exhausted: bool,
}

impl RootFamily {
    /// Whether `log₂(bound) ≤ 2^(n−d)·c·n³/ε²`.
    pub fn within(&self, c: f64) -> bool {
        self.calibration <= c
    }
}

struct Counter<'a> {
    adj: &'a [Vec<u64>],
    budget: u64,
    nodes: u64,
    exhausted: bool,
}

fn popcount(b: &[u64]) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

fn first(b: &[u64]) -> Option<usize> {
    b.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

impl Counter<'_> {
    /// Independent sets inside `p`, by branching on a vertex of largest degree.
    fn count(&mut self, p: &[u64]) -> u128 {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return 0;
        }
        let mut best = None;
        let mut best_deg = 0;
        let mut rest = p.to_vec();
        while let Some(v) = first(&rest) {
            rest[v / 64] &= !(1 << (v % 64));
            let deg = self.adj[v].iter().zip(p).map(|(a, b)| (a & b).count_ones()).sum::<u32>();
            if deg > best_deg {
                best_deg = deg;
                best = Some(v);
            }
        }
        let Some(v) = best else {
            return 1u128.checked_shl(popcount(p)).unwrap_or(u128::MAX);
        };
        let mut without = p.to_vec();
        without[v / 64] &= !(1 << (v % 64));
        let mut with = without.clone();
        for (w, a) in with.iter_mut().zip(&self.adj[v]) {
            *w &= !a;
        }
        let a = self.count(&without);
        let b = self.count(&with);
        a.saturating_add(b)
    }
}

fn independent_sets(adj: &[Vec<u64>], size: usize, limit: u64) -> Vec<u64> {
    // Only used when the whole family fits a 64-point subspace.
    let mut out = Vec::new();
    fn walk(adj: &[Vec<u64>], v: usize, size: usize, cur: u64, banned: u64, out: &mut Vec<u64>, limit: u64) {
        if out.len() as u64 >= limit {
            return;
        }
        if v == size {
            out.push(cur);
            return;
        }
        walk(adj, v + 1, size, cur, banned, out, limit);
        if (banned >> v) & 1 == 0 {
            walk(adj, v + 1, size, cur | 1 << v, banned | adj[v][0], out, limit);
        }
    }
    walk(adj, 0, size, 0, 0, &mut out, limit);
    out
}

/// Bounds the number of roots consistent with the labels of `V` (given as
/// the labeled members `v_members ⊆ F₂^d`) inside F₂ⁿ.
pub fn consistent_root_bound(v_members: &Gf2Set, n: u32, eps: Rational, node_budget: u64) -> Result<RootFamily> {
    let d = v_members.dim();
    if d > ROOT_BOUND_MAX_DIM {
        return Err(LabError::capacity("root bound subspace", d, ROOT_BOUND_MAX_DIM));
    }
    if d > n {
        return Err(LabError::invalid("d", format!("{d} exceeds n = {n}")));
    }
    if *eps.numer() == 0 {
        return Err(LabError::invalid("eps", "must be positive"));
    }
    let excluded = v_members.complement();
    let size = 1usize << d;
    let cosets = 1u64 << (n - d);
    let mut exhausted = false;
    let (per_coset, log2_per) = if excluded.contains(0) {
        (1u128, 0.0)
    } else if excluded.is_empty() {
        (1u128.checked_shl(size as u32).unwrap_or(u128::MAX), size as f64)
    } else {
        let words = size.div_ceil(64);
        let adj: Vec<Vec<u64>> = (0..size as u64)
            .map(|v| {
                let mut row = vec![0u64; words];
                for g in excluded.iter().filter(|&g| g != 0) {
                    let u = (v ^ g) as usize;
                    row[u / 64] |= 1 << (u % 64);
                }
                row
            })
            .collect();
        let mut all = vec![0u64; words];
        for v in 0..size {
            all[v / 64] |= 1 << (v % 64);
        }
        let mut counter = Counter {
            adj: &adj,
            budget: node_budget,
            nodes: 0,
            exhausted: false,
        };
        let c = counter.count(&all);
        exhausted = counter.exhausted;
        (c, if c == u128::MAX { 128.0 } else { (c as f64).log2() })
    };
    let candidates = (per_coset <= MAX_LISTED_CANDIDATES as u128 && !exhausted).then(|| {
        if excluded.contains(0) {
            return vec![Gf2Set::empty(d).expect("d is small")];
        }
        let masks = if size <= 64 {
            let adj: Vec<Vec<u64>> = (0..size as u64)
                .map(|v| vec![excluded.iter().filter(|&g| g != 0).fold(0u64, |m, g| m | 1 << (v ^ g))])
                .collect();
            independent_sets(&adj, size, MAX_LISTED_CANDIDATES)
        } else {
            // More than 64 points with few independent sets: only possible
            // when K is nearly all of V, listed by brute force over small sets.
            return small_independent_sets(&excluded);
        };
        masks
            .into_iter()
            .map(|m| Gf2Set::from_indices(d, (0..size as u64).filter(|&x| (m >> x) & 1 == 1)).expect("d is small"))
            .collect()
    });
    let log2_bound = log2_per * cosets as f64;
    let bound = per_coset
        .checked_pow(u32::try_from(cosets).unwrap_or(u32::MAX))
        .filter(|&b| b <= 1u128 << 64)
        .map_or(Bound::Overflow, Bound::Exact);
    let e = *eps.numer() as f64 / *eps.denom() as f64;
    let scale = cosets as f64 * (n as f64).powi(3) / (e * e);
    Ok(RootFamily {
        n,
        d,
        excluded,
        cosets,
        per_coset,
        candidates,
        bound,
        log2_bound,
        calibration: log2_bound / scale,
        budget_exhausted: exhausted,
    })
}

fn small_independent_sets(excluded: &Gf2Set) -> Vec<Gf2Set> {
    let d = excluded.dim();
    let free: Vec<u64> = (0..1u64 << d).collect();
    let mut out = vec![Gf2Set::empty(d).expect("d is small")];
    let mut frontier = vec![Vec::<u64>::new()];
    while let Some(cur) = frontier.pop() {
        let start = cur.last().map_or(0, |&l| l + 1);
        for &v in free.iter().skip(start as usize) {
            if cur.iter().all(|&u| !excluded.contains(u ^ v)) {
                let mut next = cur.clone();
                next.push(v);
                out.push(Gf2Set::from_indices(d, next.iter().copied()).expect("d is small"));
                frontier.push(next);
            }
        }
    }
    out.sort_by(|a, b| a.words().cmp(b.words()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{is_independent, sumset, CayleyGraph};
    use crate::oracle::{make_noisy, OracleHandle};
    use crate::refute::build_certificate;

    fn brute_count(excluded: &Gf2Set) -> u128 {
        let d = excluded.dim();
        (0..1u64 << (1 << d))
            .filter(|&m| {
                let a = Gf2Set::from_words(d, vec![m]).unwrap();
                sumset(&a).is_disjoint(excluded).unwrap()
            })
            .count() as u128
    }

    #[test]
    fn all_members_means_no_constraint() {
        let fam = consistent_root_bound(&Gf2Set::full(4).unwrap(), 8, Rational::new(1, 4), 1000).unwrap();
        assert!(fam.excluded.is_empty());
        assert_eq!(fam.per_coset, 1 << 16);
        assert_eq!(fam.bound, Bound::Overflow);
        assert_eq!(fam.log2_bound, 256.0);
        assert!(fam.candidates.is_none());
    }

    #[test]
    fn zero_excluded_collapses_to_empty_roots() {
        let mut m = Gf2Set::full(3).unwrap();
        m.remove(0).unwrap();
        let fam = consistent_root_bound(&m, 5, Rational::new(1, 4), 1000).unwrap();
        assert_eq!(fam.per_coset, 1);
        assert_eq!(fam.bound, Bound::Exact(1));
        assert_eq!(fam.candidates.unwrap(), vec![Gf2Set::empty(3).unwrap()]);
    }

    #[test]
    fn counts_match_brute_force() {
        for d in 1..=3u32 {
            for m in 0..(1u64 << (1 << d)) {
                let members = Gf2Set::from_words(d, vec![m]).unwrap();
                let fam = consistent_root_bound(&members, d + 1, Rational::new(1, 4), 1 << 20).unwrap();
                let excluded = members.complement();
                assert_eq!(fam.per_coset, brute_count(&excluded), "d={d} m={m:#x}");
                assert_eq!(fam.bound, Bound::Exact(fam.per_coset * fam.per_coset));
                for c in fam.candidates.unwrap() {
                    assert!(sumset(&c).is_disjoint(&excluded).unwrap());
                    if !excluded.contains(0) {
                        assert!(is_independent(&c, &CayleyGraph::new(excluded.clone())).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn budget_is_flagged() {
        let prf = crate::prf::Prf::new(1);
        let members = Gf2Set::from_fn(8, |x| x == 0 || !prf.word(1, x).is_multiple_of(4)).unwrap();
        let fam = consistent_root_bound(&members, 8, Rational::new(1, 4), 10).unwrap();
        assert!(fam.budget_exhausted);
        assert!(fam.candidates.is_none());
    }

    #[test]
    fn bound_shape_at_n8() {
        let eps = Rational::new(1, 4);
        let within = (0..100)
            .filter(|&seed| {
                let base = OracleHandle::lazy_random(8, Rational::new(1, 2), seed).unwrap();
                let mut o = make_noisy(&base, eps, seed + 1).unwrap();
                let cert = build_certificate(&mut o, Some(4), eps, seed, Rational::new(1, 1 << 16)).unwrap();
                let fam = consistent_root_bound(&cert.subspace_members().unwrap(), 8, eps, 1 << 20).unwrap();
                assert!(!fam.budget_exhausted);
                fam.within(ROOT_BOUND_CONSTANT)
            })
            .count();
        assert!(within >= 95, "{within}");
    }

    #[test]
    fn capacity() {
        assert!(consistent_root_bound(&Gf2Set::full(13).unwrap(), 13, Rational::new(1, 4), 1).is_err());
        assert!(consistent_root_bound(&Gf2Set::full(4).unwrap(), 3, Rational::new(1, 4), 1).is_err());
    }
}
