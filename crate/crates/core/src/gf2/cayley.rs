use crate::error::{check_same_dim, Result};

use super::set::Gf2Set;

/// The Cayley sum graph Γ(D) on F₂ⁿ: `x ~ y` iff `x + y ∈ D`.
///
/// When `0 ∈ D` every vertex carries a self-loop; loops never make a set
/// dependent, since a single vertex cannot conflict with itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyGraph {
    generators: Gf2Set,
}

impl CayleyGraph {
    pub fn new(generators: Gf2Set) -> Self {
        Self { generators }
    }

    pub fn dim(&self) -> u32 {
        self.generators.dim()
    }

    pub fn generators(&self) -> &Gf2Set {
        &self.generators
    }

    pub fn vertex_count(&self) -> u64 {
        self.generators.universe()
    }

    pub fn has_self_loops(&self) -> bool {
        self.generators.contains(0)
    }

    /// Degree of every vertex, not counting a self-loop.
    pub fn degree(&self) -> u64 {
        self.generators.len() - self.has_self_loops() as u64
    }

    pub fn is_edge(&self, x: u64, y: u64) -> bool {
        x != y && self.generators.contains(x ^ y)
    }

    /// Neighbours of `x` other than `x` itself.
    pub fn neighbors(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.generators
            .iter()
            .filter(|&g| g != 0)
            .map(move |g| g ^ x)
    }
}

/// Whether no two distinct members of `a` are adjacent in `g`.
pub fn is_independent(a: &Gf2Set, g: &CayleyGraph) -> Result<bool> {
    check_same_dim(a.dim(), g.dim())?;
    let elems: Vec<u64> = a.iter().collect();
    for (i, &x) in elems.iter().enumerate() {
        for &y in &elems[i + 1..] {
            if g.generators.contains(x ^ y) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
