//! Distinguishing games between yes and no instances.
//!
//! The advantage `|Pr[Yes | yes] − Pr[Yes | no]|` of a tester is a Monte-Carlo
//! lower estimate of the total variation distance between the transcript
//! distributions; the distance itself is never computed.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sham::{run_strategy, Problem, QueryStrategy, Round};
use super::{shift_oracles, sumset_oracle, Label};
use crate::error::{LabError, Result};
use crate::gf2::Rational;
use crate::oracle::{OracleHandle, QueryBudget};
use crate::prf::Prf;
use crate::shift::{shift_tester, Verdict};
use crate::stats::Tally;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub trials: u64,
    /// Trials (of either world) aborted for exceeding the query budget.
    pub aborted: u64,
    pub yes_given_yes: Tally,
    pub yes_given_no: Tally,
    pub advantage: f64,
    pub ci_halfwidth: f64,
    pub queries: u64,
}

/// Plays `trials` rounds of the game. Each trial draws one yes and one no
/// instance; a shared per-instance [`QueryBudget`] of `query_budget` calls is
/// attached to every oracle the sampler returns.
pub fn distinguishing_game<Y, N, T>(
    tester: T,
    yes_sampler: Y,
    no_sampler: N,
    trials: u64,
    seed: u64,
    query_budget: Option<u64>,
) -> Result<GameReport>
where
    Y: Fn(u64) -> Result<Vec<OracleHandle>> + Sync,
    N: Fn(u64) -> Result<Vec<OracleHandle>> + Sync,
    T: Fn(&mut [OracleHandle], u64) -> Result<bool> + Sync,
{
    if trials == 0 {
        return Err(LabError::invalid("trials", "must be at least 1"));
    }
    let master = Prf::new(seed);
    let play = |mut oracles: Vec<OracleHandle>, tester_seed: u64| -> Result<(Option<bool>, u64)> {
        if let Some(limit) = query_budget {
            let budget = QueryBudget::new(limit);
            for o in &mut oracles {
                o.set_budget(Some(budget.clone()));
            }
        }
        let guess = match tester(&mut oracles, tester_seed) {
            Ok(g) => Some(g),
            Err(LabError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok((guess, oracles.iter().map(OracleHandle::queries).sum()))
    };
    let results: Vec<[(Option<bool>, u64); 2]> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial = Prf::new(master.subseed(i));
            let tester_seed = trial.subseed(2);
            Ok([
                play(yes_sampler(trial.subseed(0))?, tester_seed)?,
                play(no_sampler(trial.subseed(1))?, tester_seed)?,
            ])
        })
        .collect::<Result<_>>()?;

    let mut report = GameReport {
        trials,
        aborted: 0,
        yes_given_yes: Tally::default(),
        yes_given_no: Tally::default(),
        advantage: 0.0,
        ci_halfwidth: 0.0,
        queries: 0,
    };
    for [(gy, qy), (gn, qn)] in results {
        report.queries += qy + qn;
        match gy {
            Some(g) => report.yes_given_yes.record(g),
            None => report.aborted += 1,
        }
        match gn {
            Some(g) => report.yes_given_no.record(g),
            None => report.aborted += 1,
        }
    }
    let (p1, p2) = (report.yes_given_yes.rate(), report.yes_given_no.rate());
    report.advantage = (p1 - p2).abs();
    let var = |t: &Tally| {
        let p = t.rate();
        p * (1.0 - p) / t.trials.max(1) as f64
    };
    report.ci_halfwidth = 1.96 * (var(&report.yes_given_yes) + var(&report.yes_given_no)).sqrt();
    Ok(report)
}

/// Likelihood-ratio guess for the shift problem from distinct queried points
/// (bit 0 = `O_A`, bit 1 = `O_B`).
///
/// For each candidate shift `d` the queries form disjoint pairs `q_i + q_j = d`;
/// under shift `d` a consistent pair (`B(q_i) = A(q_j)` and `B(q_j) = A(q_i)`) is
/// 4 times likelier than under independence, and `d = 0` gives a factor 2 per
/// point with `A(q) = B(q)`. Answers Yes iff the averaged ratio exceeds 1.
pub fn lr_shift_decision(rounds: &[Round]) -> bool {
    let distinct = distinct_rounds(rounds);
    let a = |r: &Round| r.bits & 1;
    let b = |r: &Round| (r.bits >> 1) & 1;
    let mut per_shift: HashMap<u64, (u32, bool)> = HashMap::new();
    for (i, ri) in distinct.iter().enumerate() {
        for rj in &distinct[..i] {
            let e = per_shift.entry(ri.point ^ rj.point).or_insert((0, true));
            e.0 += 1;
            e.1 &= b(ri) == a(rj) && b(rj) == a(ri);
        }
    }
    let zero_ok = distinct.iter().all(|r| a(r) == b(r));
    let mut score = ratio_term(2.0, distinct.len() as u32, zero_ok);
    score += per_shift
        .values()
        .map(|&(k, ok)| ratio_term(4.0, k, ok))
        .sum::<f64>();
    score > 0.0
}

/// Likelihood-ratio guess for `S_yes` vs `S_no` over F₂ⁿ⁺².
///
/// A 1 in the `(1,1)` cell only happens for yes instances. Otherwise each
/// candidate `s` not excluded by a 0 at `(1,1,s)` gains a factor 2 for every
/// agreeing pair `(1,0,x)`, `(0,1,x+s)` and is ruled out by a disagreeing one.
pub fn lr_sumset_decision(rounds: &[Round]) -> bool {
    let distinct = distinct_rounds(rounds);
    let mut per_shift: HashMap<u64, (u32, bool)> = HashMap::new();
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for r in &distinct {
        let bit = r.bits & 1;
        match r.point & 3 {
            3 if bit == 1 => return true,
            3 => {
                per_shift.entry(r.point >> 2).or_insert((0, true)).1 = false;
            }
            1 => left.push((r.point >> 2, bit)),
            2 => right.push((r.point >> 2, bit)),
            _ => {}
        }
    }
    for &(x, bx) in &left {
        for &(y, by) in &right {
            let e = per_shift.entry(x ^ y).or_insert((0, true));
            e.0 += 1;
            e.1 &= bx == by;
        }
    }
    per_shift
        .values()
        .map(|&(k, ok)| ratio_term(2.0, k, ok))
        .sum::<f64>()
        > 0.0
}

fn ratio_term(base: f64, k: u32, consistent: bool) -> f64 {
    if consistent {
        base.powi(k as i32) - 1.0
    } else {
        -1.0
    }
}

fn distinct_rounds(rounds: &[Round]) -> Vec<Round> {
    let mut seen = std::collections::HashSet::new();
    rounds
        .iter()
        .filter(|r| seen.insert(r.point))
        .copied()
        .collect()
}

/// Testers shipped with the game.
#[derive(Clone, Copy)]
pub enum Tester<'a> {
    AlwaysYes,
    /// The shift tester with proximity `eps`, unlimited queries.
    ShiftTester {
        eps: Rational,
    },
    /// `strategy` for `rounds` rounds followed by the likelihood-ratio guess.
    Likelihood {
        strategy: &'a dyn QueryStrategy,
        rounds: u64,
    },
}

impl Tester<'_> {
    /// Oracle calls allowed per instance: shift rounds query both oracles.
    pub fn query_budget(&self, problem: Problem) -> Option<u64> {
        match self {
            Tester::Likelihood { rounds, .. } => Some(match problem {
                Problem::Shift => 2 * rounds,
                Problem::Sumset => *rounds,
            }),
            _ => None,
        }
    }

    pub fn decide(
        &self,
        problem: Problem,
        oracles: &mut [OracleHandle],
        seed: u64,
    ) -> Result<bool> {
        match (self, problem) {
            (Tester::AlwaysYes, _) => Ok(true),
            (Tester::ShiftTester { eps }, Problem::Shift) => {
                let (oa, rest) = oracles.split_first_mut().expect("two oracles");
                Ok(shift_tester(oa, &mut rest[0], *eps, seed)?.verdict == Verdict::Shift)
            }
            (Tester::ShiftTester { .. }, Problem::Sumset) => Err(LabError::invalid(
                "tester",
                "the shift tester only plays the shift game",
            )),
            (Tester::Likelihood { strategy, rounds }, _) => {
                let r = run_strategy(*strategy, problem, oracles, *rounds, seed)?;
                Ok(match problem {
                    Problem::Shift => lr_shift_decision(&r),
                    Problem::Sumset => lr_sumset_decision(&r),
                })
            }
        }
    }

    /// The game on `D_yes` vs `D_no` (shift) or `S_yes` vs `S_no` (sumset).
    pub fn play(&self, problem: Problem, n: u32, trials: u64, seed: u64) -> Result<GameReport> {
        let sampler = |label: Label| {
            move |s: u64| -> Result<Vec<OracleHandle>> {
                Ok(match problem {
                    Problem::Shift => {
                        let (a, b, _) = shift_oracles(label, n, s)?;
                        vec![a, b]
                    }
                    Problem::Sumset => vec![sumset_oracle(label, n, s)?],
                })
            }
        };
        distinguishing_game(
            |o: &mut [OracleHandle], s| self.decide(problem, o, s),
            sampler(Label::Yes),
            sampler(Label::No),
            trials,
            seed,
            self.query_budget(problem),
        )
    }
}
