//! Exhaustive ground truth for `n ≤ 4`: every root `A ⊆ F₂ⁿ` is enumerated
//! and the distinct sumsets `A + A` are collected.
//!
//! Sets of F₂ⁿ for `n ≤ 4` fit in one 16-bit mask, which is how roots and
//! sumsets are handled internally.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::gf2::{dyadic, Gf2Set, Rational};

/// Largest dimension with exhaustive enumeration (2^16 roots).
pub const BRUTEFORCE_MAX_DIM: u32 = 4;

/// All distinct sumsets of F₂ⁿ.
#[derive(Clone, Debug)]
pub struct SumsetCatalog {
    n: u32,
    /// Sumset masks in ascending order.
    masks: Vec<u64>,
    /// Least root of each sumset, indexed by sumset mask; `u32::MAX` if none.
    least_root: Vec<u32>,
}

impl SumsetCatalog {
    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn count(&self) -> u64 {
        self.masks.len() as u64
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn all_sumsets(&self) -> Vec<Gf2Set> {
        self.masks.iter().map(|&m| self.set(m)).collect()
    }

    fn set(&self, mask: u64) -> Gf2Set {
        Gf2Set::from_words(self.n, vec![mask]).expect("mask fits the dimension")
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.least_root
            .get(mask as usize)
            .is_some_and(|&r| r != u32::MAX)
    }

    /// The numerically least root of the sumset `mask`.
    pub fn root_of(&self, mask: u64) -> Option<Gf2Set> {
        self.contains(mask)
            .then(|| self.set(self.least_root[mask as usize] as u64))
    }
}

fn check_dim(n: u32) -> Result<()> {
    if n == 0 {
        return Err(LabError::invalid("n", "dimension must be at least 1"));
    }
    if n > BRUTEFORCE_MAX_DIM {
        return Err(LabError::capacity(
            "exhaustive sumset enumeration",
            n,
            BRUTEFORCE_MAX_DIM,
        ));
    }
    Ok(())
}

/// Sumset masks of all roots whose high bits equal `high`, visited in
/// Gray-code order over the low `k` bits with incremental pair counts.
/// Stops early, returning `false`, as soon as `visit` does.
fn enumerate_block(
    points: u32,
    k: u32,
    high: u64,
    mut visit: impl FnMut(u64, u64) -> bool,
) -> bool {
    let mut counts = [0u16; 16];
    let mut root = high << k;
    let mut sums = 0u64;
    let add = |root: u64, x: u32, counts: &mut [u16; 16], sums: &mut u64, delta: i16| {
        for y in 0..points {
            if (root >> y) & 1 == 1 || y == x {
                let z = (x ^ y) as usize;
                counts[z] = (counts[z] as i16 + delta) as u16;
                if counts[z] == 0 {
                    *sums &= !(1 << z);
                } else {
                    *sums |= 1 << z;
                }
            }
        }
    };
    // Seed the counts with the fixed high part.
    let mut seeded = 0u64;
    for x in 0..points {
        if (root >> x) & 1 == 1 {
            add(seeded, x, &mut counts, &mut sums, 1);
            seeded |= 1 << x;
        }
    }
    if !visit(root, sums) {
        return false;
    }
    for g in 1u64..(1 << k) {
        let x = g.trailing_zeros();
        if (root >> x) & 1 == 1 {
            root &= !(1 << x);
            add(root, x, &mut counts, &mut sums, -1);
        } else {
            add(root, x, &mut counts, &mut sums, 1);
            root |= 1 << x;
        }
        if !visit(root, sums) {
            return false;
        }
    }
    true
}

/// First root, in Gray-code order, whose sumset mask satisfies `accept`.
pub(crate) fn find_root(n: u32, mut accept: impl FnMut(u64) -> bool) -> Result<Option<u64>> {
    check_dim(n)?;
    let points = 1u32 << n;
    let mut found = None;
    enumerate_block(points, points, 0, |root, sums| {
        if accept(sums) {
            found = Some(root);
            return false;
        }
        true
    });
    Ok(found)
}

fn build(n: u32) -> SumsetCatalog {
    let points = 1u32 << n;
    let k = points.min(12);
    let blocks = 1u64 << (points - k);
    let space = 1usize << points;
    let partial: Vec<Vec<u32>> = (0..blocks)
        .into_par_iter()
        .map(|high| {
            let mut least = vec![u32::MAX; space];
            enumerate_block(points, k, high, |root, sums| {
                let slot = &mut least[sums as usize];
                *slot = (*slot).min(root as u32);
                true
            });
            least
        })
        .collect();
    let mut least_root = vec![u32::MAX; space];
    for part in partial {
        for (slot, r) in least_root.iter_mut().zip(part) {
            *slot = (*slot).min(r);
        }
    }
    let masks = (0..space as u64)
        .filter(|&m| least_root[m as usize] != u32::MAX)
        .collect();
    SumsetCatalog {
        n,
        masks,
        least_root,
    }
}

/// The catalog of all sumsets of F₂ⁿ, built once per dimension.
pub fn enumerate_sumsets(n: u32) -> Result<&'static SumsetCatalog> {
    static CATALOGS: [OnceLock<SumsetCatalog>; BRUTEFORCE_MAX_DIM as usize] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    check_dim(n)?;
    Ok(CATALOGS[n as usize - 1].get_or_init(|| build(n)))
}

/// Some `A` with `A + A = s`, if one exists.
pub fn is_sumset(s: &Gf2Set) -> Result<Option<Gf2Set>> {
    let cat = enumerate_sumsets(s.dim())?;
    Ok(cat.root_of(s.words()[0]))
}

/// `min over sumsets S′ of dist(s, S′)`.
pub fn dist_to_nearest_sumset(s: &Gf2Set) -> Result<Rational> {
    let cat = enumerate_sumsets(s.dim())?;
    let m = s.words()[0];
    let best = cat
        .masks
        .iter()
        .map(|&e| (e ^ m).count_ones() as u64)
        .min()
        .expect("the empty set is always a sumset");
    Ok(dyadic(best, s.dim()))
}
