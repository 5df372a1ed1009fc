//! Consistency check by search over roots `A` that avoid every labeled
//! non-member in `A + A`.
//!
//! A valid root stays valid when grown inside the compatibility graph
//! (`u ≈ v` iff `u + v` is not a labeled non-member), so the search walks
//! cliques of that graph Bron–Kerbosch style and stops at the first one whose
//! sumset covers the labeled members. A branch is cut when even every vertex
//! still available cannot cover them.

use crate::error::Result;
use crate::gf2::Gf2Set;

use super::certificate::{Certificate, CheckOutcome};

const WORDS: usize = 4;
type Bits = [u64; WORDS];

fn bit(b: &Bits, x: u64) -> bool {
    (b[(x >> 6) as usize] >> (x & 63)) & 1 == 1
}

fn set_bit(b: &mut Bits, x: u64) {
    b[(x >> 6) as usize] |= 1 << (x & 63);
}

fn clear_bit(b: &mut Bits, x: u64) {
    b[(x >> 6) as usize] &= !(1 << (x & 63));
}

fn and(a: &Bits, b: &Bits) -> Bits {
    std::array::from_fn(|i| a[i] & b[i])
}

fn or(a: &Bits, b: &Bits) -> Bits {
    std::array::from_fn(|i| a[i] | b[i])
}

fn count(b: &Bits) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

fn members(b: &Bits) -> impl Iterator<Item = u64> + '_ {
    b.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                (i as u64) << 6 | t
            })
        })
    })
}

struct Search {
    /// `adj[v]`: vertices compatible with `v`.
    adj: Vec<Bits>,
    /// Labeled members other than 0.
    targets: Vec<u64>,
    budget: u64,
    nodes: u64,
}

impl Search {
    fn covers(&self, u: &Bits) -> bool {
        self.targets
            .iter()
            .all(|&p| members(u).any(|x| bit(u, x ^ p)))
    }

    /// `Some(root)` on success, `None` when the subtree holds no valid root.
    /// `Err(())` on budget exhaustion.
    fn expand(&mut self, r: &Bits, mut p: Bits, mut x: Bits) -> std::result::Result<Option<Bits>, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        if r.iter().any(|&w| w != 0) && self.covers(r) {
            return Ok(Some(*r));
        }
        if count(&p) == 0 || !self.covers(&or(r, &p)) {
            return Ok(None);
        }
        let pivot = members(&or(&p, &x))
            .max_by_key(|&u| (count(&and(&p, &self.adj[u as usize])), std::cmp::Reverse(u)))
            .expect("p is nonempty");
        let pa = self.adj[pivot as usize];
        let branch: Vec<u64> = members(&p).filter(|&v| !bit(&pa, v)).collect();
        for v in branch {
            let nv = self.adj[v as usize];
            let mut r2 = *r;
            set_bit(&mut r2, v);
            if let Some(found) = self.expand(&r2, and(&p, &nv), and(&x, &nv))? {
                return Ok(Some(found));
            }
            clear_bit(&mut p, v);
            set_bit(&mut x, v);
        }
        Ok(None)
    }
}

pub(super) fn check(cert: &Certificate, node_budget: u64) -> Result<CheckOutcome> {
    let n = cert.meta.n;
    let (yes, no) = cert.label_sets()?;
    if yes.is_empty() {
        return Ok(CheckOutcome::Consistent { root: Gf2Set::empty(n)? });
    }
    if no.contains(0) {
        return Ok(CheckOutcome::Refuted);
    }
    let size = 1u64 << n;
    let adj: Vec<Bits> = (0..size)
        .map(|v| {
            let mut row = [0u64; WORDS];
            for u in 0..size {
                if u != v && !no.contains(u ^ v) {
                    set_bit(&mut row, u);
                }
            }
            row
        })
        .collect();
    let mut all = [0u64; WORDS];
    (0..size).for_each(|v| set_bit(&mut all, v));
    let mut search = Search {
        adj,
        targets: yes.iter().filter(|&p| p != 0).collect(),
        budget: node_budget,
        nodes: 0,
    };
    match search.expand(&[0; WORDS], all, [0; WORDS]) {
        Err(()) => Ok(CheckOutcome::Unknown { nodes: search.nodes - 1 }),
        Ok(None) => Ok(CheckOutcome::Refuted),
        Ok(Some(r)) => {
            let root = Gf2Set::from_indices(n, members(&r))?;
            debug_assert!(cert.agrees_with(&root));
            Ok(CheckOutcome::Consistent { root })
        }
    }
}
