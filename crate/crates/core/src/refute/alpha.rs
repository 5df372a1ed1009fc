//! Independence numbers of Cayley sum graphs.
//!
//! Translation is an automorphism, so some maximum independent set contains
//! 0. The exact search therefore looks for a maximum clique among
//! `C = {v ≠ 0 : v ∉ D}` in the compatibility graph `u ≈ v ⇔ u + v ∉ D`,
//! using greedy colouring as the bound. The search is sequential so that
//! budgeted runs are reproducible; callers parallelize across graphs.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::gf2::{CayleyGraph, Gf2Set};

/// Largest dimension for the exact search.
pub const ALPHA_EXACT_MAX_DIM: u32 = 16;

/// Largest dimension for the greedy bound.
pub const ALPHA_GREEDY_MAX_DIM: u32 = 24;

/// Largest candidate count `|{v ≠ 0 : v ∉ D}|` for the exact search (32 MiB of adjacency).
pub const ALPHA_EXACT_MAX_VERTICES: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub value: u64,
    /// True when `value` is known to be the maximum.
    pub proved: bool,
    pub witness: Gf2Set,
    pub nodes: u64,
}

/// `α(G)` with self-loops ignored. Exact mode runs to completion.
pub fn independence_number(g: &CayleyGraph, mode: AlphaMode) -> Result<AlphaResult> {
    independence_number_with_budget(g, mode, u64::MAX)
}

/// As [`independence_number`], but the exact search stops after `node_budget`
/// branch nodes and reports the best set found with `proved = false`.
pub fn independence_number_with_budget(g: &CayleyGraph, mode: AlphaMode, node_budget: u64) -> Result<AlphaResult> {
    let n = g.dim();
    let limit = match mode {
        AlphaMode::Exact => ALPHA_EXACT_MAX_DIM,
        AlphaMode::Greedy => ALPHA_GREEDY_MAX_DIM,
    };
    if n > limit {
        return Err(LabError::capacity("independence number", n, limit));
    }
    let mut d = g.generators().clone();
    d.remove(0)?;
    if d.is_empty() {
        return Ok(AlphaResult {
            value: 1 << n,
            proved: true,
            witness: Gf2Set::full(n)?,
            nodes: 0,
        });
    }
    let greedy = greedy_set(&d);
    match mode {
        AlphaMode::Greedy => Ok(AlphaResult {
            value: greedy.len() as u64,
            proved: greedy.len() == 1 && d.len() + 1 == d.universe(),
            witness: Gf2Set::from_indices(n, greedy)?,
            nodes: 0,
        }),
        AlphaMode::Exact => {
            let graph = Compat::new(&d)?;
            let (clique, proved, nodes) = graph.max_clique(greedy.len() as u32 - 1, node_budget);
            let mut witness: Vec<u64> = match clique {
                Some(c) => std::iter::once(0).chain(c).collect(),
                None => greedy,
            };
            witness.sort_unstable();
            Ok(AlphaResult {
                value: witness.len() as u64,
                proved,
                witness: Gf2Set::from_indices(n, witness)?,
                nodes,
            })
        }
    }
}

/// Greedy independent set through 0: repeatedly add the least compatible point.
fn greedy_set(d: &Gf2Set) -> Vec<u64> {
    let allowed = d.complement();
    let mut cand = allowed.clone();
    cand.remove(0).expect("0 is in range");
    let mut out = vec![0];
    while let Some(v) = cand.first() {
        out.push(v);
        cand = cand.intersection(&allowed.shift_by(v)).expect("same dimension");
        cand.remove(v).expect("in range");
    }
    out
}

/// Candidates are renumbered by descending degree, which is the order the
/// colouring visits them in.
struct Compat {
    words: usize,
    /// `labels[i]`: the point of F₂ⁿ behind vertex `i`.
    labels: Vec<u64>,
    rows: Vec<Vec<u64>>,
}

fn first_bit(b: &[u64]) -> Option<usize> {
    b.iter()
        .position(|&w| w != 0)
        .map(|i| i * 64 + b[i].trailing_zeros() as usize)
}

impl Compat {
    fn new(d: &Gf2Set) -> Result<Self> {
        let allowed = d.complement();
        let cand: Vec<u64> = allowed.iter().filter(|&v| v != 0).collect();
        if cand.len() > ALPHA_EXACT_MAX_VERTICES {
            return Err(LabError::capacity(
                "exact independence number candidates",
                cand.len() as u32,
                ALPHA_EXACT_MAX_VERTICES as u32,
            ));
        }
        let mut degree: Vec<(usize, u64)> = cand
            .par_iter()
            .map(|&v| (cand.iter().filter(|&&u| u != v && allowed.contains(u ^ v)).count(), v))
            .collect();
        degree.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let labels: Vec<u64> = degree.into_iter().map(|(_, v)| v).collect();
        let words = labels.len().div_ceil(64).max(1);
        let rows = labels
            .par_iter()
            .map(|&v| {
                let mut row = vec![0u64; words];
                for (j, &u) in labels.iter().enumerate() {
                    if u != v && allowed.contains(u ^ v) {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
                row
            })
            .collect();
        Ok(Self { words, labels, rows })
    }

    fn all(&self) -> Vec<u64> {
        let mut p = vec![0u64; self.words];
        for j in 0..self.labels.len() {
            p[j / 64] |= 1 << (j % 64);
        }
        p
    }

    /// `out = p ∩ N(v)`.
    fn restrict(&self, p: &[u64], v: usize, out: &mut Vec<u64>) {
        out.clear();
        out.extend(p.iter().zip(&self.rows[v]).map(|(a, b)| a & b));
    }

    /// Greedy colouring of `p`: vertices in colour order with their colour
    /// numbers (1-based).
    fn colour(&self, p: &[u64]) -> (Vec<usize>, Vec<u32>) {
        let mut rest = p.to_vec();
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut k = 0;
        let mut q = Vec::with_capacity(self.words);
        let mut nb = Vec::with_capacity(self.words);
        while rest.iter().any(|&w| w != 0) {
            k += 1;
            q.clear();
            q.extend_from_slice(&rest);
            while let Some(v) = first_bit(&q) {
                rest[v / 64] &= !(1 << (v % 64));
                q[v / 64] &= !(1 << (v % 64));
                self.restrict(&q, v, &mut nb);
                for (a, b) in q.iter_mut().zip(&nb) {
                    *a &= !b;
                }
                order.push(v);
                colours.push(k);
            }
        }
        (order, colours)
    }

    /// Largest clique in `C` with more than `lower` vertices, if any.
    fn max_clique(&self, lower: u32, budget: u64) -> (Option<Vec<u64>>, bool, u64) {
        let best = Cell::new(lower);
        let nodes = Cell::new(0u64);
        let stop = Cell::new(false);
        let ctx = Ctx {
            graph: self,
            best: &best,
            nodes: &nodes,
            stop: &stop,
            budget,
        };
        let (order, colours) = self.colour(&self.all());
        // Branch i picks order[i] and may use only vertices earlier in the order.
        let branch = |i: usize| {
                if colours[i] <= best.get() || stop.get() {
                    return None;
                }
                let mut p = vec![0u64; self.words];
                for &u in &order[..i] {
                    p[u / 64] |= 1 << (u % 64);
                }
                let mut sub = Vec::new();
                self.restrict(&p, order[i], &mut sub);
                let mut path = vec![order[i] as u64];
                ctx.expand(&sub, &mut path)
                    .map(|c| {
                        let mut c: Vec<u64> = c.into_iter().map(|j| self.labels[j as usize]).collect();
                        c.sort_unstable();
                        c
                    })
        };
        let results: Vec<Option<Vec<u64>>> = (0..order.len()).map(branch).collect();
        let proved = !stop.get();
        let found = results
            .into_iter()
            .flatten()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)));
        (found, proved, nodes.get())
    }
}

struct Ctx<'a> {
    graph: &'a Compat,
    best: &'a Cell<u32>,
    nodes: &'a Cell<u64>,
    stop: &'a Cell<bool>,
    budget: u64,
}

impl Ctx<'_> {
    /// Best clique extending `path` inside `p` that beats the global best.
    fn expand(&self, p: &[u64], path: &mut Vec<u64>) -> Option<Vec<u64>> {
        self.nodes.set(self.nodes.get() + 1);
        if self.nodes.get() > self.budget {
            self.stop.set(true);
        }
        if self.stop.get() {
            return None;
        }
        let mut found = None;
        if p.iter().all(|&w| w == 0) {
            if self.best.get() < path.len() as u32 {
                self.best.set(path.len() as u32);
                let mut c = path.clone();
                c.sort_unstable();
                found = Some(c);
            }
            return found;
        }
        let (order, colours) = self.graph.colour(p);
        let mut p = p.to_vec();
        let mut sub = Vec::with_capacity(p.len());
        for i in (0..order.len()).rev() {
            if path.len() as u32 + colours[i] <= self.best.get() {
                break;
            }
            let v = order[i];
            self.graph.restrict(&p, v, &mut sub);
            path.push(v as u64);
            let next = sub.clone();
            if let Some(c) = self.expand(&next, path) {
                found = Some(c);
            }
            path.pop();
            p[v / 64] &= !(1 << (v % 64));
            if self.stop.get() {
                break;
            }
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{is_independent, Gf2Vector, Rational};
    use crate::oracle::OracleHandle;

    fn graph(n: u32, gens: &[u64]) -> CayleyGraph {
        CayleyGraph::new(Gf2Set::from_indices(n, gens.iter().copied()).unwrap())
    }

    /// Largest independent set by trying every subset.
    fn brute_alpha(g: &CayleyGraph) -> u64 {
        let n = g.dim();
        (0..1u64 << (1 << n))
            .filter(|&m| is_independent(&Gf2Set::from_words(n, vec![m]).unwrap(), g).unwrap())
            .map(|m| m.count_ones() as u64)
            .max()
            .unwrap()
    }

    #[test]
    fn examples() {
        let empty = independence_number(&graph(5, &[]), AlphaMode::Exact).unwrap();
        assert_eq!(empty.value, 32);
        let all: Vec<u64> = (1..16).collect();
        assert_eq!(independence_number(&graph(4, &all), AlphaMode::Exact).unwrap().value, 1);
        let c4 = graph(2, &[0b01, 0b10]);
        let r = independence_number(&c4, AlphaMode::Exact).unwrap();
        assert_eq!(r.value, 2);
        assert!(r.proved);
        assert!(is_independent(&r.witness, &c4).unwrap());
        let v = Gf2Vector::from_coords("11").unwrap();
        assert!(r.witness.contains(0) && r.witness.contains(v.bits()));
    }

    #[test]
    fn loops_are_ignored() {
        let a = independence_number(&graph(3, &[0, 1, 2]), AlphaMode::Exact).unwrap();
        let b = independence_number(&graph(3, &[1, 2]), AlphaMode::Exact).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_matches_brute_force_at_small_n() {
        for n in 1..=3u32 {
            for m in 0..(1u64 << (1 << n)) {
                let g = CayleyGraph::new(Gf2Set::from_words(n, vec![m]).unwrap());
                let r = independence_number(&g, AlphaMode::Exact).unwrap();
                assert_eq!(r.value, brute_alpha(&g), "n={n} D={m:#x}");
                assert!(r.proved);
                assert_eq!(r.witness.len(), r.value);
                assert!(is_independent(&r.witness, &g).unwrap());
                let greedy = independence_number(&g, AlphaMode::Greedy).unwrap();
                assert!(greedy.value <= r.value);
                assert!(is_independent(&greedy.witness, &g).unwrap());
            }
        }
    }

    #[test]
    fn n4_random_generators() {
        let prf = crate::prf::Prf::new(77);
        for i in 0..40 {
            let d = OracleHandle::lazy_random(4, Rational::new(1 + i % 3, 6), prf.subseed(i))
                .unwrap()
                .materialize()
                .unwrap();
            let g = CayleyGraph::new(d);
            let r = independence_number(&g, AlphaMode::Exact).unwrap();
            assert_eq!(r.value, brute_alpha(&g));
        }
    }

    #[test]
    fn random_graphs_at_n8_are_deterministic() {
        let d = OracleHandle::lazy_random(8, Rational::new(1, 4), 5).unwrap().materialize().unwrap();
        let g = CayleyGraph::new(d);
        let a = independence_number(&g, AlphaMode::Exact).unwrap();
        let b = independence_number(&g, AlphaMode::Exact).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.proved);
        assert!(is_independent(&a.witness, &g).unwrap());
        assert!(independence_number(&g, AlphaMode::Greedy).unwrap().value <= a.value);
    }

    #[test]
    fn budget_and_capacity() {
        let d = OracleHandle::lazy_random(10, Rational::new(1, 4), 5).unwrap().materialize().unwrap();
        let g = CayleyGraph::new(d);
        let r = independence_number_with_budget(&g, AlphaMode::Exact, 5).unwrap();
        assert!(!r.proved);
        assert!(is_independent(&r.witness, &g).unwrap());
        let big = CayleyGraph::new(Gf2Set::empty(17).unwrap());
        assert!(independence_number(&big, AlphaMode::Exact).is_err());
    }
}
