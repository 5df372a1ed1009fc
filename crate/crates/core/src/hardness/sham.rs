//! Deferred-decision sham oracles and the query strategies run against them.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_sumset_dim, lift};
use crate::error::{LabError, Result};
use crate::gf2::{check_vector_dim, mask, Gf2Vector};
use crate::oracle::{OracleHandle, Transcript};
use crate::prf::{domain, Prf};
use crate::stats::Tally;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Shift,
    Sumset,
}

impl Problem {
    /// Dimension of query points for an instance of size `n`.
    pub fn point_dim(self, n: u32) -> u32 {
        match self {
            Problem::Shift => n,
            Problem::Sumset => n + 2,
        }
    }
}

/// One answered round. For the shift problem bit 0 is `O_A(point)` and bit 1
/// is `O_B(point)`; for the sumset problem bit 0 is `O_S(point)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round {
    pub point: u64,
    pub bits: u8,
}

/// A deterministic adaptive query rule. Randomised strategies draw from `prf`,
/// which is fixed per trial.
pub trait QueryStrategy: Sync {
    fn name(&self) -> &str;

    /// The next point to query, of dimension `problem.point_dim(n)`.
    fn next_query(&self, problem: Problem, n: u32, prf: &Prf, history: &[Round]) -> u64;
}

/// The shipped strategy suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Uniform points.
    Random,
    /// A fresh point, then that point plus a fresh guess for the hidden shift.
    PairCrafting,
    /// Among 8 random candidates, the one covering the most new hidden-shift guesses.
    AdaptiveGreedy,
    /// Alternates uniform points of the `(1,0)` and `(0,1)` cells.
    Mixed,
    /// Distinct points of the `(1,1)` cell.
    Corner11,
    /// Points of the `(0,0)` cell.
    ZeroCoset,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Random,
        Builtin::PairCrafting,
        Builtin::AdaptiveGreedy,
        Builtin::Mixed,
        Builtin::Corner11,
        Builtin::ZeroCoset,
    ];

    pub fn suite(problem: Problem) -> &'static [Builtin] {
        match problem {
            Problem::Shift => &Self::ALL[..3],
            Problem::Sumset => &Self::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::Random => "random",
            Builtin::PairCrafting => "pair-crafting",
            Builtin::AdaptiveGreedy => "adaptive-greedy",
            Builtin::Mixed => "mixed",
            Builtin::Corner11 => "corner11",
            Builtin::ZeroCoset => "zero-coset",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == name)
            .ok_or_else(|| LabError::invalid("strategy", format!("unknown strategy `{name}`")))
    }
}

fn cross_point(n: u32, word: u64) -> u64 {
    let v = (word >> 1) & mask(n);
    if word & 1 == 0 {
        lift(true, false, v)
    } else {
        lift(false, true, v)
    }
}

/// Hidden-shift guesses already ruled out by `history`: pairwise sums for the
/// shift problem, `(1,1)`-cell sums and queried `(1,1)` points for sumsets.
fn covered(problem: Problem, history: &[Round]) -> HashSet<u64> {
    let mut out = HashSet::new();
    for (i, r) in history.iter().enumerate() {
        match problem {
            Problem::Shift => out.extend(history[..i].iter().map(|h| h.point ^ r.point)),
            Problem::Sumset => {
                if r.point & 3 == 3 {
                    out.insert(r.point >> 2);
                }
                out.extend(
                    history[..i]
                        .iter()
                        .filter(|h| (h.point ^ r.point) & 3 == 3)
                        .map(|h| (h.point ^ r.point) >> 2),
                );
            }
        }
    }
    out
}

fn fresh_sums(problem: Problem, q: u64, history: &[Round], covered: &HashSet<u64>) -> usize {
    let sums: HashSet<u64> = history
        .iter()
        .filter_map(|h| match problem {
            Problem::Shift => Some(h.point ^ q),
            Problem::Sumset => ((h.point ^ q) & 3 == 3).then_some((h.point ^ q) >> 2),
        })
        .filter(|d| !covered.contains(d))
        .collect();
    sums.len()
}

impl QueryStrategy for Builtin {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn next_query(&self, problem: Problem, n: u32, prf: &Prf, history: &[Round]) -> u64 {
        let t = history.len() as u64;
        let word = |i: u64| prf.word(domain::STRATEGY, i);
        let uniform = mask(problem.point_dim(n));
        match (self, problem) {
            (Builtin::PairCrafting, _) if t % 2 == 1 => {
                let guess = word(t) & mask(n);
                let prev = history[t as usize - 1].point;
                match problem {
                    Problem::Shift => prev ^ guess,
                    Problem::Sumset => prev ^ lift(true, true, guess),
                }
            }
            (Builtin::PairCrafting, Problem::Sumset) | (Builtin::Mixed, Problem::Sumset) => {
                cross_point(n, (word(t) & !1) | (t & 1))
            }
            (Builtin::AdaptiveGreedy, _) => {
                let done = covered(problem, history);
                let candidate = |j: u64| match problem {
                    Problem::Shift => word(8 * t + j) & uniform,
                    Problem::Sumset => cross_point(n, word(8 * t + j)),
                };
                (0..8)
                    .map(candidate)
                    .enumerate()
                    .max_by_key(|&(j, q)| {
                        (fresh_sums(problem, q, history, &done), std::cmp::Reverse(j))
                    })
                    .map(|(_, q)| q)
                    .expect("eight candidates")
            }
            (Builtin::Corner11, Problem::Sumset) => {
                let used: HashSet<u64> = history.iter().map(|h| h.point).collect();
                (0..)
                    .map(|j| lift(true, true, word(t << 20 | j) & mask(n)))
                    .find(|q| !used.contains(q))
                    .expect("fewer queries than points")
            }
            (Builtin::ZeroCoset, Problem::Sumset) => lift(false, false, word(t) & mask(n)),
            _ => word(t) & uniform,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShamOptions {
    /// Treat `s = q + q = 0` as a failure in the shift process.
    pub include_self_pair: bool,
}

impl Default for ShamOptions {
    fn default() -> Self {
        Self {
            include_self_pair: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShamOutcome {
    pub transcript: Transcript,
    pub rounds: Vec<Round>,
    pub failed: bool,
    /// 1-based round at which the process halted.
    pub failure_round: Option<u64>,
    /// The failure came from the `s = 0` self pair.
    pub self_pair_failure: bool,
    pub hidden: u64,
}

/// Drives `strategy` for `budget` rounds. New points go to `answer`, which may
/// report failure with `None`; repeated points are answered from the history.
fn drive(
    strategy: &dyn QueryStrategy,
    problem: Problem,
    n: u32,
    budget: u64,
    strategy_seed: u64,
    mut answer: impl FnMut(u64, &HashSet<u64>) -> Result<Option<u8>>,
) -> Result<(Vec<Round>, Option<u64>)> {
    let prf = Prf::new(strategy_seed);
    let dim = problem.point_dim(n);
    let mut rounds: Vec<Round> = Vec::with_capacity(budget as usize);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut known: HashMap<u64, u8> = HashMap::new();
    for t in 0..budget {
        let q = strategy.next_query(problem, n, &prf, &rounds);
        if q & !mask(dim) != 0 {
            return Err(LabError::invalid(
                "strategy",
                format!("{} produced a point outside F₂^{dim}", strategy.name()),
            ));
        }
        let bits = match known.get(&q) {
            Some(&b) => b,
            None => match answer(q, &seen)? {
                Some(b) => {
                    seen.insert(q);
                    known.insert(q, b);
                    b
                }
                None => return Ok((rounds, Some(t + 1))),
            },
        };
        rounds.push(Round { point: q, bits });
    }
    Ok((rounds, None))
}

fn check_budget(dim: u32, budget: u64) -> Result<()> {
    check_vector_dim(dim)?;
    if dim < 63 && budget > 1u64 << dim {
        return Err(LabError::invalid(
            "budget",
            format!("{budget} exceeds 2^{dim}"),
        ));
    }
    Ok(())
}

fn outcome(
    problem: Problem,
    n: u32,
    rounds: Vec<Round>,
    halted: Option<u64>,
    self_pair_failure: bool,
    hidden: u64,
) -> Result<ShamOutcome> {
    let dim = problem.point_dim(n);
    let mut transcript = Transcript::default();
    for r in &rounds {
        let p = Gf2Vector::new(dim, r.point)?;
        match problem {
            Problem::Shift => {
                transcript.push(p, "A", r.bits & 1 == 1);
                transcript.push(p, "B", r.bits & 2 == 2);
            }
            Problem::Sumset => transcript.push(p, "S", r.bits & 1 == 1),
        }
    }
    Ok(ShamOutcome {
        transcript,
        rounds,
        failed: halted.is_some(),
        failure_round: halted,
        self_pair_failure,
        hidden,
    })
}

/// The deferred-decision process for shift testing: a hidden uniform `s`, two
/// fresh uniform bits per new query `q_t`, and failure as soon as
/// `s = q_t + q_t'` for an earlier (or, with `include_self_pair`, the same) query.
pub fn sham_shift_process(
    strategy: &dyn QueryStrategy,
    n: u32,
    budget: u64,
    seed: u64,
    opts: ShamOptions,
) -> Result<ShamOutcome> {
    check_budget(n, budget)?;
    let prf = Prf::new(seed);
    let s = prf.word(domain::HIDDEN, 0) & mask(n);
    let mut self_pair = false;
    let (rounds, halted) = drive(
        strategy,
        Problem::Shift,
        n,
        budget,
        prf.subseed(0),
        |q, seen| {
            if opts.include_self_pair && s == 0 {
                self_pair = true;
                return Ok(None);
            }
            if seen.contains(&(q ^ s)) {
                return Ok(None);
            }
            let a = prf.word(domain::ANSWER_A, q) & 1;
            let b = prf.word(domain::ANSWER_B, q) & 1;
            Ok(Some((a | b << 1) as u8))
        },
    )?;
    outcome(Problem::Shift, n, rounds, halted, self_pair, s)
}

/// The sham oracle for sumset testing over F₂ⁿ⁺² with hidden `(1,1,s)`:
/// `(0,0,·)` answers 1; `(1,1,s)` fails and other `(1,1,·)` answer 0; other
/// points fail if they sum with an earlier query to `(1,1,s)`, and otherwise
/// get a fresh uniform bit.
pub fn sham_sumset_oracle(
    strategy: &dyn QueryStrategy,
    n: u32,
    budget: u64,
    seed: u64,
) -> Result<ShamOutcome> {
    check_sumset_dim(n)?;
    check_budget(n + 2, budget)?;
    let prf = Prf::new(seed);
    let s = prf.word(domain::HIDDEN, 0) & mask(n);
    let hidden = lift(true, true, s);
    let (rounds, halted) = drive(
        strategy,
        Problem::Sumset,
        n,
        budget,
        prf.subseed(0),
        |q, seen| {
            Ok(match q & 3 {
                0 => Some(1),
                3 => (q != hidden).then_some(0),
                _ if seen.contains(&(q ^ hidden)) => None,
                _ => Some((prf.word(domain::ANSWER_A, q) & 1) as u8),
            })
        },
    )?;
    outcome(Problem::Sumset, n, rounds, halted, false, hidden)
}

/// Runs `strategy` against real oracles (`[A, B]` for shifts, `[S]` for
/// sumsets) with the same strategy randomness a sham run with `seed` uses.
pub fn run_strategy(
    strategy: &dyn QueryStrategy,
    problem: Problem,
    oracles: &mut [OracleHandle],
    budget: u64,
    seed: u64,
) -> Result<Vec<Round>> {
    let expected = match problem {
        Problem::Shift => 2,
        Problem::Sumset => 1,
    };
    if oracles.len() != expected {
        return Err(LabError::invalid(
            "oracles",
            format!("expected {expected} oracles"),
        ));
    }
    let dim = oracles[0].dim();
    let n = match problem {
        Problem::Shift => dim,
        Problem::Sumset => dim
            .checked_sub(2)
            .filter(|&n| n >= 1)
            .ok_or_else(|| LabError::invalid("oracles", "sumset oracle needs dimension ≥ 3"))?,
    };
    let (rounds, _) = drive(
        strategy,
        problem,
        n,
        budget,
        Prf::new(seed).subseed(0),
        |q, _| {
            let mut bits = 0u8;
            for (i, o) in oracles.iter_mut().enumerate() {
                bits |= (o.query_bits(q)? as u8) << i;
            }
            Ok(Some(bits))
        },
    )?;
    Ok(rounds)
}

/// Failure statistics of a sham process over `trials` seeded runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShamStats {
    pub failures: Tally,
    pub self_pair_failures: u64,
}

impl ShamStats {
    pub fn run(
        problem: Problem,
        strategy: &dyn QueryStrategy,
        n: u32,
        budget: u64,
        trials: u64,
        seed: u64,
        opts: ShamOptions,
    ) -> Result<Self> {
        let prf = Prf::new(seed);
        let outcomes: Vec<(bool, bool)> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let trial = prf.subseed(i);
                let o = match problem {
                    Problem::Shift => sham_shift_process(strategy, n, budget, trial, opts)?,
                    Problem::Sumset => sham_sumset_oracle(strategy, n, budget, trial)?,
                };
                Ok((o.failed, o.self_pair_failure))
            })
            .collect::<Result<_>>()?;
        let mut stats = ShamStats::default();
        for (failed, self_pair) in outcomes {
            stats.failures.record(failed);
            stats.self_pair_failures += self_pair as u64;
        }
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardness::{sumset_oracle, Label};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
        let stat: f64 = observed
            .iter()
            .zip(expected)
            .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
            .sum();
        let df = (observed.len() - 1) as f64;
        1.0 - ChiSquared::new(df).unwrap().cdf(stat)
    }

    #[test]
    fn single_query_never_fails_unless_shift_is_zero() {
        for seed in 0..2000 {
            let o =
                sham_shift_process(&Builtin::Random, 4, 1, seed, ShamOptions::default()).unwrap();
            assert_eq!(o.failed, o.hidden == 0);
            assert_eq!(o.self_pair_failure, o.hidden == 0);
            let lenient = ShamOptions {
                include_self_pair: false,
            };
            assert!(
                !sham_shift_process(&Builtin::Random, 4, 1, seed, lenient)
                    .unwrap()
                    .failed
            );
        }
    }

    #[test]
    fn failure_is_exactly_a_pair_summing_to_the_hidden_shift() {
        for seed in 0..300 {
            let o =
                sham_shift_process(&Builtin::Random, 6, 12, seed, ShamOptions::default()).unwrap();
            let pts: Vec<u64> = o.rounds.iter().map(|r| r.point).collect();
            let mut distinct = pts.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let hit = distinct
                .iter()
                .enumerate()
                .any(|(i, &p)| distinct[..i].iter().any(|&q| p ^ q == o.hidden));
            assert!(!hit, "completed rounds never contain the pair");
            if let Some(t) = o.failure_round {
                assert!(t <= o.transcript.len() as u64 + 1);
                assert_eq!(t as usize, o.rounds.len() + 1);
            }
            assert_eq!(o.transcript.len(), 2 * o.rounds.len());
        }
    }

    #[test]
    fn repeats_are_answered_from_history() {
        struct Repeat;
        impl QueryStrategy for Repeat {
            fn name(&self) -> &str {
                "repeat"
            }
            fn next_query(&self, _: Problem, _: u32, _: &Prf, _: &[Round]) -> u64 {
                5
            }
        }
        let o = sham_shift_process(&Repeat, 8, 10, 3, ShamOptions::default()).unwrap();
        if !o.failed {
            assert_eq!(o.rounds.len(), 10);
            assert!(o.rounds.iter().all(|r| r.bits == o.rounds[0].bits));
        }
        let o = sham_sumset_oracle(&Repeat, 8, 10, 3).unwrap();
        assert!(!o.failed);
        assert!(o.rounds.iter().all(|r| r.bits == o.rounds[0].bits));
    }

    #[test]
    fn shift_process_failure_rates_are_small() {
        for b in Builtin::suite(Problem::Shift) {
            let stats =
                ShamStats::run(Problem::Shift, b, 16, 25, 10_000, 1, ShamOptions::default())
                    .unwrap();
            assert!(
                stats.failures.rate() <= 0.05,
                "{}: {}",
                b.as_str(),
                stats.failures.rate()
            );
        }
    }

    #[test]
    fn pair_crafting_stays_below_the_pair_count_bound() {
        // Each guess hits with probability 2⁻ⁿ, so failure ≈ (N/2)·2⁻ⁿ ≤ (N²/2)·2⁻ⁿ.
        let (n, budget) = (12u32, 6u64);
        let stats = ShamStats::run(
            Problem::Shift,
            &Builtin::PairCrafting,
            n,
            budget,
            20_000,
            9,
            ShamOptions::default(),
        )
        .unwrap();
        let bound = (budget * budget) as f64 / 2.0 / 4096.0;
        assert!(
            stats.failures.rate() <= bound + 3.0 * stats.failures.std_error(),
            "{:?}",
            stats
        );
        let at_scale = ShamStats::run(
            Problem::Shift,
            &Builtin::PairCrafting,
            16,
            25,
            10_000,
            9,
            ShamOptions::default(),
        )
        .unwrap();
        assert!(at_scale.failures.rate() < 0.02);
    }

    #[test]
    fn shift_answers_are_uniform_without_failure() {
        let mut counts = [0u64; 16];
        for seed in 0..10_000 {
            let o =
                sham_shift_process(&Builtin::Random, 10, 2, seed, ShamOptions::default()).unwrap();
            if o.failed || o.rounds[0].point == o.rounds[1].point {
                continue;
            }
            counts[(o.rounds[0].bits | o.rounds[1].bits << 2) as usize] += 1;
        }
        let total: u64 = counts.iter().sum();
        let p = chi_square_p(&counts, &[total as f64 / 16.0; 16]);
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn sumset_sham_rules() {
        let o = sham_sumset_oracle(&Builtin::ZeroCoset, 10, 50, 2).unwrap();
        assert!(!o.failed);
        assert!(o.rounds.iter().all(|r| r.bits == 1));
        for b in Builtin::suite(Problem::Sumset) {
            let stats = ShamStats::run(
                Problem::Sumset,
                b,
                16,
                25,
                10_000,
                4,
                ShamOptions::default(),
            )
            .unwrap();
            assert!(
                stats.failures.rate() <= 0.05,
                "{}: {}",
                b.as_str(),
                stats.failures.rate()
            );
        }
    }

    #[test]
    fn corner_failure_matches_exact_formula() {
        let (n, budget, trials) = (12u32, 25u64, 10_000u64);
        let exact = 1.0
            - (1..=budget)
                .map(|i| 1.0 - 1.0 / ((1u64 << n) - i + 1) as f64)
                .product::<f64>();
        let stats = ShamStats::run(
            Problem::Sumset,
            &Builtin::Corner11,
            n,
            budget,
            trials,
            7,
            ShamOptions::default(),
        )
        .unwrap();
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!(
            (stats.failures.rate() - exact).abs() <= 3.0 * se,
            "{} vs {exact}",
            stats.failures.rate()
        );
    }

    #[test]
    fn sumset_sham_matches_true_no_oracle_on_cross_cells() {
        // Two-sample chi-square on the number of 1-answers in 25 cross-cell queries.
        let (n, budget, trials) = (10u32, 25u64, 4_000u64);
        let mut sham = vec![0u64; 26];
        let mut real = vec![0u64; 26];
        for i in 0..trials {
            let o = sham_sumset_oracle(&Builtin::Mixed, n, budget, i).unwrap();
            if !o.failed {
                sham[o.rounds.iter().map(|r| r.bits as usize).sum::<usize>()] += 1;
            }
            let mut s = [sumset_oracle(Label::No, n, 1_000_000 + i).unwrap()];
            let rounds = run_strategy(&Builtin::Mixed, Problem::Sumset, &mut s, budget, i).unwrap();
            real[rounds.iter().map(|r| r.bits as usize).sum::<usize>()] += 1;
        }
        // Pool sparse tails so every cell has a healthy expectation.
        let pool = |h: &[u64]| -> Vec<u64> {
            let mut v = vec![h[..=8].iter().sum()];
            v.extend_from_slice(&h[9..=16]);
            v.push(h[17..].iter().sum());
            v
        };
        let (a, b) = (pool(&sham), pool(&real));
        let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
        let stat: f64 = a
            .iter()
            .zip(&b)
            .filter(|(x, y)| **x + **y > 0)
            .map(|(&x, &y)| {
                let (x, y) = (x as f64, y as f64);
                let (k1, k2) = ((nb / na).sqrt(), (na / nb).sqrt());
                (k1 * x - k2 * y).powi(2) / (x + y)
            })
            .sum();
        let p = 1.0 - ChiSquared::new((a.len() - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn strategies_are_deterministic_and_in_range() {
        for problem in [Problem::Shift, Problem::Sumset] {
            for b in Builtin::suite(problem) {
                let x = sham_sumset_or_shift(problem, b, 9);
                let y = sham_sumset_or_shift(problem, b, 9);
                assert_eq!(x, y);
            }
        }
        assert_eq!(Builtin::parse("corner11").unwrap(), Builtin::Corner11);
        assert!(Builtin::parse("nope").is_err());
    }

    fn sham_sumset_or_shift(problem: Problem, b: &Builtin, seed: u64) -> ShamOutcome {
        match problem {
            Problem::Shift => sham_shift_process(b, 8, 16, seed, ShamOptions::default()).unwrap(),
            Problem::Sumset => sham_sumset_oracle(b, 8, 16, seed).unwrap(),
        }
    }

    #[test]
    fn budget_above_space_is_rejected() {
        assert!(sham_shift_process(&Builtin::Random, 2, 5, 0, ShamOptions::default()).is_err());
    }
}
