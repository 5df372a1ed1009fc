use crate::error::{check_same_dim, LabError, Result};

use super::vector::{check_vector_dim, mask, Gf2Vector};

/// The split F₂ⁿ = D₁ ⊕ D₂ used by the shift tester.
///
/// D₁ holds the vectors whose last ⌊n/2⌋ coordinates vanish (free in the
/// low ⌈n/2⌉ bits); D₂ holds those whose first ⌈n/2⌉ coordinates vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfSpacePair {
    n: u32,
}

impl HalfSpacePair {
    pub fn new(n: u32) -> Result<Self> {
        check_vector_dim(n)?;
        Ok(Self { n })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    /// Number of free coordinates of D₁, `⌈n/2⌉`.
    pub fn d1_dim(&self) -> u32 {
        self.n.div_ceil(2)
    }

    /// Number of free coordinates of D₂, `⌊n/2⌋`.
    pub fn d2_dim(&self) -> u32 {
        self.n / 2
    }

    pub fn d1_mask(&self) -> u64 {
        mask(self.d1_dim())
    }

    pub fn d2_mask(&self) -> u64 {
        mask(self.n) & !self.d1_mask()
    }

    pub fn d1_len(&self) -> u64 {
        1 << self.d1_dim()
    }

    pub fn d2_len(&self) -> u64 {
        1 << self.d2_dim()
    }

    /// Elements of D₁ in ascending order.
    pub fn d1(&self) -> impl Iterator<Item = u64> {
        0..self.d1_len()
    }

    /// Elements of D₂ in ascending order.
    pub fn d2(&self) -> impl Iterator<Item = u64> {
        let shift = self.d1_dim();
        (0..self.d2_len()).map(move |j| j << shift)
    }
}

/// The unique `(z₁, z₂) ∈ D₁ × D₂` with `z₁ + z₂ = z`.
pub fn decompose(z: Gf2Vector, hs: &HalfSpacePair) -> Result<(Gf2Vector, Gf2Vector)> {
    check_same_dim(z.dim(), hs.n)?;
    let z1 = Gf2Vector::new(hs.n, z.bits() & hs.d1_mask())?;
    let z2 = Gf2Vector::new(hs.n, z.bits() & hs.d2_mask())?;
    Ok((z1, z2))
}

/// A linear subspace of F₂ⁿ held as a fully reduced echelon basis.
///
/// Each basis vector's highest set bit is its pivot and no other basis
/// vector touches that pivot, so reducing a point by the basis yields the
/// numerically least element of its coset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    n: u32,
    basis: Vec<u64>,
}

impl Subspace {
    pub fn span(n: u32, generators: impl IntoIterator<Item = u64>) -> Result<Self> {
        check_vector_dim(n)?;
        let mut basis: Vec<u64> = Vec::new();
        for g in generators {
            if g & !mask(n) != 0 {
                return Err(LabError::invalid(
                    "generator",
                    format!("{g:#x} outside F_2^{n}"),
                ));
            }
            let mut v = g;
            for &b in &basis {
                if v & top_bit(b) != 0 {
                    v ^= b;
                }
            }
            if v == 0 {
                continue;
            }
            let p = top_bit(v);
            for b in basis.iter_mut() {
                if *b & p != 0 {
                    *b ^= v;
                }
            }
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
        Ok(Self { n, basis })
    }

    /// `span(e₁, …, e_d)`, the vectors supported on the first `d` coordinates.
    pub fn coordinate(n: u32, d: u32) -> Result<Self> {
        if d > n {
            return Err(LabError::invalid("d", format!("{d} exceeds n = {n}")));
        }
        Self::span(n, (0..d).map(|i| 1u64 << i))
    }

    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    /// Least element of the coset `x + V`.
    pub fn coset_rep(&self, x: u64) -> u64 {
        let mut v = x;
        for &b in &self.basis {
            if v & top_bit(b) != 0 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, x: u64) -> bool {
        self.coset_rep(x) == 0
    }

    /// All `2^dim` elements, enumerated by the binary counter over the basis.
    pub fn elements(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(1 << self.basis.len());
        out.push(0u64);
        for &b in self.basis.iter().rev() {
            let len = out.len();
            for i in 0..len {
                out.push(out[i] ^ b);
            }
        }
        out
    }

    /// Representatives of all cosets, ascending.
    pub fn coset_reps(&self) -> Vec<u64> {
        let pivots: u64 = self.basis.iter().map(|&b| top_bit(b)).fold(0, |a, p| a | p);
        let mut reps: Vec<u64> = (0..(1u64 << self.n)).filter(|x| x & pivots == 0).collect();
        reps.sort_unstable();
        reps
    }
}

fn top_bit(v: u64) -> u64 {
    1 << (63 - v.leading_zeros())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Gf2Vector {
        Gf2Vector::from_coords(s).unwrap()
    }

    #[test]
    fn decompose_examples() {
        let hs = HalfSpacePair::new(2).unwrap();
        assert_eq!(decompose(v("00"), &hs).unwrap(), (v("00"), v("00")));
        assert_eq!(decompose(v("11"), &hs).unwrap(), (v("10"), v("01")));
        let hs3 = HalfSpacePair::new(3).unwrap();
        assert_eq!(decompose(v("111"), &hs3).unwrap(), (v("110"), v("001")));
        assert!(decompose(v("111"), &hs).is_err());
    }

    #[test]
    fn half_spaces_partition_exhaustively() {
        for n in 1..=16 {
            let hs = HalfSpacePair::new(n).unwrap();
            assert_eq!(hs.d1_len() * hs.d2_len(), 1 << n);
            assert_eq!(hs.d1_mask() & hs.d2_mask(), 0);
            for z in 0..(1u64 << n) {
                let (z1, z2) = decompose(Gf2Vector::new(n, z).unwrap(), &hs).unwrap();
                assert_eq!(z1.bits() & !hs.d1_mask(), 0);
                assert_eq!(z2.bits() & !hs.d2_mask(), 0);
                assert_eq!((z1 + z2).bits(), z);
            }
        }
        let one = HalfSpacePair::new(1).unwrap();
        assert_eq!(one.d1().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(one.d2().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn subspace_coset_reps_are_least_elements() {
        let v = Subspace::span(5, [0b00110, 0b01100, 0b00110, 0b10001]).unwrap();
        assert_eq!(v.dim(), 3);
        let elems = v.elements();
        assert_eq!(elems.len(), 8);
        for x in 0..32u64 {
            let least = elems.iter().map(|e| e ^ x).min().unwrap();
            assert_eq!(v.coset_rep(x), least);
        }
        assert_eq!(v.coset_reps().len(), 4);
    }

    #[test]
    fn coordinate_subspace() {
        let v = Subspace::coordinate(6, 3).unwrap();
        let mut e = v.elements();
        e.sort_unstable();
        assert_eq!(e, (0..8).collect::<Vec<_>>());
        assert_eq!(v.coset_reps(), (0..8).map(|i| i << 3).collect::<Vec<_>>());
        assert!(Subspace::coordinate(3, 4).is_err());
    }
}
