//! The shift tester and exact nearest-shift computations.
//!
//! Given oracles for `A, B ⊆ F₂ⁿ`, the tester decides whether `B = A + z` for
//! some `z` or `B` is ε-far from every shift of `A`. Each repetition draws a
//! uniform `r`, queries `A` on `D₁ + r` and `B` on `D₂ + r`, and thereby learns
//! whether `O_A(r + z₁) = O_B(r + z₂)` for every `z = z₁ + z₂` at once.

use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, LabError, Result};
use crate::gf2::{dyadic, wht, Gf2Set, Gf2Vector, HalfSpacePair, Rational};
use crate::oracle::OracleHandle;
use crate::prf::{domain, Prf};

/// Largest dimension the tester accepts (its agreement table has `2ⁿ` cells).
pub const SHIFT_TEST_MAX_DIM: u32 = 26;

/// Largest dimension for [`agreement_spectrum`] and [`nearest_shift`].
pub const SPECTRUM_MAX_DIM: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Shift,
    FarFromShift,
}

/// `counts[z]` is the number of repetitions in which the two oracles agreed at `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementTable {
    pub n: u32,
    pub repetitions: u32,
    pub counts: Vec<u32>,
}

impl AgreementTable {
    /// `p_z` as an exact fraction of the repetitions.
    pub fn fraction(&self, z: u64) -> Rational {
        Rational::new(self.counts[z as usize] as u64, self.repetitions as u64)
    }

    /// Least `z` with `p_z = 1`.
    pub fn first_full(&self) -> Option<u64> {
        self.counts
            .iter()
            .position(|&c| c == self.repetitions)
            .map(|z| z as u64)
    }
}

#[derive(Clone, Debug)]
pub struct ShiftVerdict {
    pub verdict: Verdict,
    pub witness: Option<Gf2Vector>,
    pub queries_used: u64,
    pub repetitions: u32,
    pub table: AgreementTable,
}

/// `⌈n/ε⌉`.
pub fn repetitions(n: u32, eps: Rational) -> Result<u32> {
    check_eps(eps)?;
    let (p, q) = (*eps.numer() as u128, *eps.denom() as u128);
    let r = (n as u128 * q).div_ceil(p);
    u32::try_from(r).map_err(|_| LabError::invalid("eps", "too many repetitions"))
}

/// `⌈n/ε⌉·(2^⌊n/2⌋ + 2^⌈n/2⌉)`, the exact number of queries the tester makes.
pub fn expected_queries(n: u32, eps: Rational) -> Result<u64> {
    let r = repetitions(n, eps)? as u64;
    Ok(r * ((1u64 << (n / 2)) + (1u64 << n.div_ceil(2))))
}

fn check_eps(eps: Rational) -> Result<()> {
    if *eps.numer() == 0 || eps > Rational::from_integer(1) {
        return Err(LabError::invalid("eps", format!("{eps} is outside (0, 1]")));
    }
    Ok(())
}

/// Runs the shift tester on `oa` and `ob` with proximity `eps`.
///
/// One-sided: if `B` is a shift of `A` the verdict is always `Shift`.
pub fn shift_tester(
    oa: &mut OracleHandle,
    ob: &mut OracleHandle,
    eps: Rational,
    seed: u64,
) -> Result<ShiftVerdict> {
    let n = oa.dim();
    check_same_dim(n, ob.dim())?;
    if n > SHIFT_TEST_MAX_DIM {
        return Err(LabError::capacity("shift tester", n, SHIFT_TEST_MAX_DIM));
    }
    let reps = repetitions(n, eps)?;
    let hs = HalfSpacePair::new(n)?;
    let (h1, len1, len2) = (hs.d1_dim(), hs.d1_len() as usize, hs.d2_len() as usize);
    let prf = Prf::new(seed);
    let (qa, qb) = (oa.queries(), ob.queries());

    let mut counts = vec![0u32; 1 << n];
    let mut a = vec![false; len1];
    let mut b = vec![false; len2];
    for i in 0..reps {
        let r = prf.word(domain::SHIFT_POINT, i as u64) & crate::gf2::mask(n);
        for (j, slot) in a.iter_mut().enumerate() {
            *slot = oa.query_bits(r ^ j as u64)?;
        }
        for (k, slot) in b.iter_mut().enumerate() {
            *slot = ob.query_bits(r ^ ((k as u64) << h1))?;
        }
        for (row, &bk) in counts.chunks_exact_mut(len1).zip(&b) {
            for (c, &aj) in row.iter_mut().zip(&a) {
                *c += (aj == bk) as u32;
            }
        }
    }

    let table = AgreementTable {
        n,
        repetitions: reps,
        counts,
    };
    let witness = table
        .first_full()
        .map(|z| Gf2Vector::new(n, z))
        .transpose()?;
    Ok(ShiftVerdict {
        verdict: if witness.is_some() {
            Verdict::Shift
        } else {
            Verdict::FarFromShift
        },
        witness,
        queries_used: (oa.queries() - qa) + (ob.queries() - qb),
        repetitions: reps,
        table,
    })
}

/// Number of points `x` with `x ∈ B ⇔ x + z ∈ A`, for every `z`.
pub fn agreement_counts(a: &Gf2Set, b: &Gf2Set) -> Result<Vec<u64>> {
    check_same_dim(a.dim(), b.dim())?;
    let n = a.dim();
    if n > SPECTRUM_MAX_DIM {
        return Err(LabError::capacity(
            "agreement spectrum",
            n,
            SPECTRUM_MAX_DIM,
        ));
    }
    let corr = wht::xor_correlation(&b.signs(), &a.signs());
    let total = a.universe() as i64;
    Ok(corr.into_iter().map(|c| ((total + c) / 2) as u64).collect())
}

/// `1 − dist(A + z, B)` for every `z`, exactly.
pub fn agreement_spectrum(a: &Gf2Set, b: &Gf2Set) -> Result<Vec<Rational>> {
    let n = a.dim();
    Ok(agreement_counts(a, b)?
        .into_iter()
        .map(|c| dyadic(c, n))
        .collect())
}

/// A `z` minimising `dist(A + z, B)` (least such `z`) and that minimum.
pub fn nearest_shift(a: &Gf2Set, b: &Gf2Set) -> Result<(Gf2Vector, Rational)> {
    let counts = agreement_counts(a, b)?;
    let mut best = 0usize;
    for (z, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = z;
        }
    }
    let n = a.dim();
    Ok((
        Gf2Vector::new(n, best as u64)?,
        dyadic(a.universe() - counts[best], n),
    ))
}
