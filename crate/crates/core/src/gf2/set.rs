use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, LabError, Result};

use super::vector::{mask, Gf2Vector};
use super::{dyadic, wht, Rational};

/// Largest dimension with explicit `2ⁿ`-bit storage (32 MiB).
pub const MAX_SET_DIM: u32 = 28;

/// Dimension up to which [`sumset`] may use the transform route.
const WHT_SUMSET_MAX_DIM: u32 = 22;

/// A subset of F₂ⁿ stored as a `2ⁿ`-bit membership map with cached cardinality.
///
/// Serializes as its dimension and ascending element list.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub struct Gf2Set {
    n: u32,
    words: Vec<u64>,
    card: u64,
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    n: u32,
    elements: Vec<u64>,
}

impl From<Gf2Set> for SetRepr {
    fn from(s: Gf2Set) -> Self {
        SetRepr {
            n: s.n,
            elements: s.iter().collect(),
        }
    }
}

impl TryFrom<SetRepr> for Gf2Set {
    type Error = LabError;

    fn try_from(r: SetRepr) -> Result<Self> {
        Gf2Set::from_indices(r.n, r.elements)
    }
}

fn check_set_dim(n: u32) -> Result<()> {
    if n == 0 {
        return Err(LabError::invalid("n", "dimension must be at least 1"));
    }
    if n > MAX_SET_DIM {
        return Err(LabError::capacity("explicit set", n, MAX_SET_DIM));
    }
    Ok(())
}

fn word_count(n: u32) -> usize {
    if n >= 6 {
        1 << (n - 6)
    } else {
        1
    }
}

// Masks selecting bit positions whose index has bit k clear.
const SWAP_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Moves bit `i` of `word` to bit `i ^ z` for `z < 64`.
#[inline]
pub(crate) fn permute_word(mut word: u64, z: u64) -> u64 {
    for (k, m) in SWAP_MASKS.iter().enumerate() {
        if (z >> k) & 1 == 1 {
            let s = 1u32 << k;
            word = ((word & m) << s) | ((word >> s) & m);
        }
    }
    word
}

impl Gf2Set {
    pub fn empty(n: u32) -> Result<Self> {
        check_set_dim(n)?;
        Ok(Self {
            n,
            words: vec![0; word_count(n)],
            card: 0,
        })
    }

    pub fn full(n: u32) -> Result<Self> {
        check_set_dim(n)?;
        let mut words = vec![u64::MAX; word_count(n)];
        if n < 6 {
            words[0] = mask(1 << n);
        }
        Ok(Self {
            n,
            words,
            card: 1 << n,
        })
    }

    pub fn from_indices(n: u32, items: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for x in items {
            set.insert(x)?;
        }
        Ok(set)
    }

    pub fn from_vectors<'a>(
        n: u32,
        items: impl IntoIterator<Item = &'a Gf2Vector>,
    ) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for v in items {
            check_same_dim(n, v.dim())?;
            set.insert(v.bits())?;
        }
        Ok(set)
    }

    /// Builds `{x : pred(x)}` by scanning all `2ⁿ` points.
    pub fn from_fn(n: u32, mut pred: impl FnMut(u64) -> bool) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for x in 0..(1u64 << n) {
            if pred(x) {
                set.words[(x >> 6) as usize] |= 1 << (x & 63);
                set.card += 1;
            }
        }
        Ok(set)
    }

    /// Takes ownership of raw membership words; bits beyond `2ⁿ` must be clear.
    pub fn from_words(n: u32, words: Vec<u64>) -> Result<Self> {
        check_set_dim(n)?;
        if words.len() != word_count(n) {
            return Err(LabError::invalid(
                "words",
                format!(
                    "expected {} words for n = {n}, got {}",
                    word_count(n),
                    words.len()
                ),
            ));
        }
        if n < 6 && words[0] & !mask(1 << n) != 0 {
            return Err(LabError::invalid(
                "words",
                "bits set outside the index space",
            ));
        }
        let card = words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(Self { n, words, card })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    /// Size of the ambient space, `2ⁿ`.
    pub fn universe(&self) -> u64 {
        1 << self.n
    }

    pub fn len(&self) -> u64 {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn check_index(&self, x: u64) -> Result<()> {
        if x >= self.universe() {
            return Err(LabError::invalid(
                "point",
                format!("{x:#x} is outside F_2^{}", self.n),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: u64) -> bool {
        x < self.universe() && (self.words[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    pub fn contains_vec(&self, v: Gf2Vector) -> Result<bool> {
        check_same_dim(self.n, v.dim())?;
        Ok(self.contains(v.bits()))
    }

    /// Inserts `x`; returns whether it was newly added.
    pub fn insert(&mut self, x: u64) -> Result<bool> {
        self.check_index(x)?;
        let w = &mut self.words[(x >> 6) as usize];
        let bit = 1 << (x & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        self.card += fresh as u64;
        Ok(fresh)
    }

    pub fn remove(&mut self, x: u64) -> Result<bool> {
        self.check_index(x)?;
        let w = &mut self.words[(x >> 6) as usize];
        let bit = 1 << (x & 63);
        let present = *w & bit != 0;
        *w &= !bit;
        self.card -= present as u64;
        Ok(present)
    }

    pub fn toggle(&mut self, x: u64) -> Result<()> {
        if !self.remove(x)? {
            self.insert(x)?;
        }
        Ok(())
    }

    /// Ascending iterator over member indices.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = (wi as u64) << 6;
            BitIter(w).map(move |b| base | b)
        })
    }

    pub fn vectors(&self) -> impl Iterator<Item = Gf2Vector> + '_ {
        let n = self.n;
        self.iter()
            .map(move |x| Gf2Vector::truncated(n, x).expect("valid dimension"))
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<u64> {
        self.iter().next()
    }

    fn zip_words(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        check_same_dim(self.n, other.n)?;
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let card = words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(Self {
            n: self.n,
            words,
            card,
        })
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a ^ b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let full = Self::full(self.n).expect("dimension already validated");
        full.difference(self).expect("same dimension")
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        check_same_dim(self.n, other.n)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        check_same_dim(self.n, other.n)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0))
    }

    /// `|A ∩ (A + z)|`-style overlap of `self + z` with `other`.
    pub(crate) fn shifted_overlap_nonzero(&self, other: &Self, z: u64) -> bool {
        let hi = (z >> 6) as usize;
        let lo = z & 63;
        self.words
            .iter()
            .enumerate()
            .any(|(w, &a)| permute_word(a, lo) & other.words[w ^ hi] != 0)
    }

    /// The translate `A + z`.
    pub fn shift(&self, z: Gf2Vector) -> Result<Self> {
        check_same_dim(self.n, z.dim())?;
        Ok(self.shift_by(z.bits()))
    }

    pub(crate) fn shift_by(&self, z: u64) -> Self {
        let hi = (z >> 6) as usize;
        let lo = z & 63;
        let mut words = vec![0u64; self.words.len()];
        for (w, &a) in self.words.iter().enumerate() {
            words[w ^ hi] = permute_word(a, lo);
        }
        Self {
            n: self.n,
            words,
            card: self.card,
        }
    }

    /// Number of members with `x₁ = b₁` and `x₂ = b₂`.
    pub(crate) fn coset_count(&self, b1: bool, b2: bool) -> u64 {
        let offset = (b1 as u32) | ((b2 as u32) << 1);
        let m = 0x1111_1111_1111_1111u64 << offset;
        self.words.iter().map(|w| (w & m).count_ones() as u64).sum()
    }

    /// `±1` indicator: `+1` for members, `-1` otherwise.
    pub(crate) fn signs(&self) -> Vec<i64> {
        (0..self.universe())
            .map(|x| if self.contains(x) { 1 } else { -1 })
            .collect()
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as u64;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl Ord for Gf2Set {
    /// Orders by dimension, then by the membership map read as a big integer.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Gf2Set {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Gf2Set {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Gf2Set(n={}, |S|={}", self.n, self.card)?;
        if self.card <= 16 {
            write!(f, ", {{")?;
            for (i, x) in self.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x:#x}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, ")")
    }
}

/// `dist(A, B) = |A △ B| / 2ⁿ`, exactly.
pub fn dist(a: &Gf2Set, b: &Gf2Set) -> Result<Rational> {
    check_same_dim(a.n, b.n)?;
    let diff: u64 = a
        .words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum();
    Ok(dyadic(diff, a.n))
}

/// The sumset `A + A = {a + b : a, b ∈ A}`.
pub fn sumset(a: &Gf2Set) -> Gf2Set {
    let k = a.card;
    let n = a.n;
    if k == 0 {
        return Gf2Set::empty(n).expect("valid dimension");
    }
    let pairs = k.saturating_mul(k + 1) / 2;
    if pairs <= 4 * a.universe() {
        sumset_pairwise(a)
    } else if n <= WHT_SUMSET_MAX_DIM {
        sumset_transform(a)
    } else {
        sumset_scan(a)
    }
}

pub(crate) fn sumset_pairwise(a: &Gf2Set) -> Gf2Set {
    let elems: Vec<u64> = a.iter().collect();
    let mut out = Gf2Set::empty(a.n).expect("valid dimension");
    let full = a.universe();
    for (i, &x) in elems.iter().enumerate() {
        for &y in &elems[i..] {
            let s = x ^ y;
            let w = &mut out.words[(s >> 6) as usize];
            let bit = 1 << (s & 63);
            if *w & bit == 0 {
                *w |= bit;
                out.card += 1;
            }
        }
        if out.card == full {
            break;
        }
    }
    out
}

pub(crate) fn sumset_transform(a: &Gf2Set) -> Gf2Set {
    let f: Vec<i64> = (0..a.universe()).map(|x| a.contains(x) as i64).collect();
    let r = wht::xor_correlation(&f, &f);
    Gf2Set::from_fn(a.n, |z| r[z as usize] != 0).expect("valid dimension")
}

pub(crate) fn sumset_scan(a: &Gf2Set) -> Gf2Set {
    Gf2Set::from_fn(a.n, |z| a.shifted_overlap_nonzero(a, z)).expect("valid dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: u32, coords: &[&str]) -> Gf2Set {
        let vs: Vec<Gf2Vector> = coords
            .iter()
            .map(|c| Gf2Vector::from_coords(c).unwrap())
            .collect();
        Gf2Set::from_vectors(n, &vs).unwrap()
    }

    #[test]
    fn sumset_examples() {
        assert!(sumset(&Gf2Set::empty(2).unwrap()).is_empty());
        assert_eq!(sumset(&set(2, &["00"])), set(2, &["00"]));
        assert_eq!(sumset(&set(2, &["01", "10"])), set(2, &["00", "11"]));
    }

    #[test]
    fn shift_examples() {
        let a = set(2, &["00", "01"]);
        let z = Gf2Vector::from_coords("10").unwrap();
        assert_eq!(a.shift(z).unwrap(), set(2, &["10", "11"]));
        assert_eq!(a.shift(Gf2Vector::zero(2).unwrap()).unwrap(), a);
        assert!(a.shift(Gf2Vector::zero(3).unwrap()).is_err());
    }

    #[test]
    fn dist_examples() {
        let a = set(2, &["00"]);
        let b = set(2, &["01"]);
        assert_eq!(dist(&a, &a).unwrap(), Rational::from_integer(0));
        assert_eq!(dist(&a, &b).unwrap(), Rational::new(2, 4));
        let e = Gf2Set::empty(5).unwrap();
        let f = Gf2Set::full(5).unwrap();
        assert_eq!(dist(&e, &f).unwrap(), Rational::from_integer(1));
        assert!(dist(&a, &e).is_err());
    }

    #[test]
    fn full_set_small_dims() {
        for n in 1..=8 {
            let f = Gf2Set::full(n).unwrap();
            assert_eq!(f.len(), 1 << n);
            assert_eq!(f.iter().count() as u64, 1 << n);
            assert!(f.complement().is_empty());
        }
        assert!(Gf2Set::empty(29).is_err());
        assert!(Gf2Set::empty(0).is_err());
    }

    #[test]
    fn insert_remove_track_cardinality() {
        let mut s = Gf2Set::empty(7).unwrap();
        assert!(s.insert(100).unwrap());
        assert!(!s.insert(100).unwrap());
        assert!(s.insert(3).unwrap());
        assert_eq!(s.len(), 2);
        assert!(s.remove(100).unwrap());
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3]);
        assert!(s.insert(128).is_err());
    }

    #[test]
    fn permute_word_moves_bits() {
        for z in 0..64u64 {
            for i in 0..64u64 {
                assert_eq!(permute_word(1 << i, z), 1 << (i ^ z));
            }
        }
    }

    fn arb_set(max_n: u32) -> impl Strategy<Value = Gf2Set> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), 1usize << n)
                .prop_map(move |bits| Gf2Set::from_fn(n, |x| bits[x as usize]).unwrap())
        })
    }

    proptest! {
        #[test]
        fn sumset_routes_agree(a in arb_set(9)) {
            let p = sumset_pairwise(&a);
            prop_assert_eq!(&p, &sumset_transform(&a));
            prop_assert_eq!(&p, &sumset_scan(&a));
            prop_assert_eq!(&p, &sumset(&a));
        }

        #[test]
        fn sumset_contains_zero_and_is_bounded(a in arb_set(9)) {
            let s = sumset(&a);
            if !a.is_empty() {
                prop_assert!(s.contains(0));
            }
            let k = a.len();
            prop_assert!(s.len() <= (1u64 << a.dim()).min(k * (k + 1) / 2));
        }

        #[test]
        fn sumset_is_shift_invariant(a in arb_set(9), z in any::<u64>()) {
            let z = Gf2Vector::truncated(a.dim(), z).unwrap();
            prop_assert_eq!(sumset(&a.shift(z).unwrap()), sumset(&a));
        }

        #[test]
        fn shift_is_an_involution(a in arb_set(10), z in any::<u64>()) {
            let z = Gf2Vector::truncated(a.dim(), z).unwrap();
            let b = a.shift(z).unwrap();
            prop_assert_eq!(b.len(), a.len());
            for x in a.iter() {
                prop_assert!(b.contains(x ^ z.bits()));
            }
            prop_assert_eq!(b.shift(z).unwrap(), a);
        }

        #[test]
        fn dist_is_a_metric(
            (a, b, c) in (1u32..=10).prop_flat_map(|n| {
                let one = move || proptest::collection::vec(any::<bool>(), 1usize << n)
                    .prop_map(move |bits| Gf2Set::from_fn(n, |x| bits[x as usize]).unwrap());
                (one(), one(), one())
            })
        ) {
            prop_assert_eq!(dist(&a, &b).unwrap(), dist(&b, &a).unwrap());
            prop_assert_eq!(dist(&a, &a).unwrap(), Rational::from_integer(0));
            prop_assert_eq!(dist(&a, &b).unwrap() == Rational::from_integer(0), a == b);
            prop_assert!(dist(&a, &c).unwrap() <= dist(&a, &b).unwrap() + dist(&b, &c).unwrap());
        }
    }
}
