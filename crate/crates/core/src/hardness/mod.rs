//! Hard instances for shift and sumset testing, and the processes used to
//! simulate query-bounded testers against them.
//!
//! Points of F₂ⁿ⁺² are written `(b₁, b₂, v)` with `b₁` in bit 0, `b₂` in bit 1
//! and `v ∈ F₂ⁿ` in the remaining bits.

mod game;
mod sham;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, LabError, Result};
use crate::gf2::{mask, sumset, vol, Gf2Set, Gf2Vector, Rational};
use crate::oracle::OracleHandle;
use crate::prf::{domain, Prf};

pub use game::{distinguishing_game, lr_shift_decision, lr_sumset_decision, GameReport, Tester};
pub use sham::{
    run_strategy, sham_shift_process, sham_sumset_oracle, Builtin, Problem, QueryStrategy, Round,
    ShamOptions, ShamOutcome, ShamStats,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
}

/// A pair `(A, B)` drawn from the yes or no distribution.
#[derive(Clone, Debug)]
pub struct ShiftInstance {
    pub a: Gf2Set,
    pub b: Gf2Set,
    pub hidden_shift: Option<Gf2Vector>,
    pub label: Label,
}

/// A set `S ⊆ F₂ⁿ⁺²` built from a shift instance.
#[derive(Clone, Debug)]
pub struct SumsetInstance {
    pub s: Gf2Set,
    pub hidden_point: Option<Gf2Vector>,
    pub root: Option<Gf2Set>,
    pub label: Label,
}

/// The point `(b₁, b₂, v)` of F₂ⁿ⁺².
#[inline]
pub fn lift(b1: bool, b2: bool, v: u64) -> u64 {
    (b1 as u64) | ((b2 as u64) << 1) | (v << 2)
}

/// Oracles for a draw from the yes (`B = A + s`) or no (`A, B` independent)
/// distribution, plus the hidden shift for yes draws. Lazy, so any `n ≤ 62`.
pub fn shift_oracles(
    label: Label,
    n: u32,
    seed: u64,
) -> Result<(OracleHandle, OracleHandle, Option<Gf2Vector>)> {
    let prf = Prf::new(seed);
    let half = Rational::new(1, 2);
    let a = OracleHandle::lazy_random(n, half, prf.subseed(0))?.with_tag("A");
    match label {
        Label::Yes => {
            let s = Gf2Vector::new(n, prf.word(domain::HIDDEN, 0) & mask(n))?;
            let b = OracleHandle::shifted(&a, s)?.with_tag("B");
            Ok((a, b, Some(s)))
        }
        Label::No => {
            let b = OracleHandle::lazy_random(n, half, prf.subseed(1))?.with_tag("B");
            Ok((a, b, None))
        }
    }
}

/// Oracle for `S_yes = S(A, A + s) ⊔ {(1,1,s)}` or `S_no = S(A, B)` over F₂ⁿ⁺².
pub fn sumset_oracle(label: Label, n: u32, seed: u64) -> Result<OracleHandle> {
    let (a, b, s) = shift_oracles(label, n, seed)?;
    Ok(OracleHandle::embedded(&a, &b, s)?.with_tag("S"))
}

fn materialized(label: Label, n: u32, seed: u64) -> Result<ShiftInstance> {
    let (a, b, s) = shift_oracles(label, n, seed)?;
    Ok(ShiftInstance {
        a: a.materialize()?,
        b: b.materialize()?,
        hidden_shift: s,
        label,
    })
}

/// A uniform `A` and `B = A + s` for uniform `s`.
pub fn sample_dyes(n: u32, seed: u64) -> Result<ShiftInstance> {
    materialized(Label::Yes, n, seed)
}

/// Independent uniform `A` and `B`.
pub fn sample_dno(n: u32, seed: u64) -> Result<ShiftInstance> {
    materialized(Label::No, n, seed)
}

/// `S(A, B) = {(0,0,x)} ⊔ {(1,0,a) : a ∈ A} ⊔ {(0,1,b) : b ∈ B}`.
pub fn embed(a: &Gf2Set, b: &Gf2Set) -> Result<Gf2Set> {
    check_same_dim(a.dim(), b.dim())?;
    let s = OracleHandle::embedded(
        &OracleHandle::explicit(a.clone()),
        &OracleHandle::explicit(b.clone()),
        None,
    )?;
    s.materialize()
}

fn with_extra(s: &mut Gf2Set, shift: Gf2Vector) -> Result<Gf2Vector> {
    let p = Gf2Vector::new(s.dim(), lift(true, true, shift.bits()))?;
    s.insert(p.bits())?;
    Ok(p)
}

/// `S_yes` with its root `C = {0} ⊔ {(1,0,a)} ⊔ {(1,1,s)}` attached when
/// `A + A = F₂ⁿ`, which is exactly when `C + C = S_yes`.
pub fn sample_syes(n: u32, seed: u64) -> Result<SumsetInstance> {
    let inst = sample_dyes(n, seed)?;
    let shift = inst.hidden_shift.expect("yes instances carry a shift");
    let mut s = embed(&inst.a, &inst.b)?;
    let hidden = with_extra(&mut s, shift)?;
    let root = if sumset(&inst.a).len() == inst.a.universe() {
        let mut c = Gf2Set::from_fn(n + 2, |x| x & 3 == 1 && inst.a.contains(x >> 2))?;
        c.insert(0)?;
        c.insert(hidden.bits())?;
        Some(c)
    } else {
        None
    };
    Ok(SumsetInstance {
        s,
        hidden_point: Some(hidden),
        root,
        label: Label::Yes,
    })
}

/// `S_no = S(A, B)` for a no draw.
pub fn sample_sno(n: u32, seed: u64) -> Result<SumsetInstance> {
    let inst = sample_dno(n, seed)?;
    Ok(SumsetInstance {
        s: embed(&inst.a, &inst.b)?,
        hidden_point: None,
        root: None,
        label: Label::No,
    })
}

/// The volume conditions of ε-eligibility: `Vol₀₀(S) ≥ 1 − ε` and `Vol₁₁(S) ≤ ε`.
pub fn is_eligible(s: &Gf2Set, eps: Rational) -> Result<bool> {
    let one = Rational::from_integer(1);
    let v00 = vol(s, false, false)?;
    let v11 = vol(s, true, true)?;
    let low_ok = eps >= one || v00 >= one - eps;
    Ok(low_ok && v11 <= eps)
}

/// Rejects dimensions that cannot host a sumset instance.
pub(crate) fn check_sumset_dim(n: u32) -> Result<()> {
    if n + 2 > crate::gf2::MAX_VECTOR_DIM {
        return Err(LabError::capacity(
            "sumset instance",
            n,
            crate::gf2::MAX_VECTOR_DIM - 2,
        ));
    }
    Ok(())
}
