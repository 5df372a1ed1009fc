//! Membership oracles with query accounting.
//!
//! Every answer is a deterministic function of the backend, its seeds and the
//! queried point, so lazily sampled sets behave like fixed hidden sets:
//! asking the same point twice returns the same bit, and the order of queries
//! never matters. Repeated queries are still counted.

mod backend;
mod descriptor;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, LabError, Result};
use crate::gf2::{check_vector_dim, Gf2Set, Gf2Vector, Rational, MAX_SET_DIM};

pub use backend::Backend;
pub use descriptor::{OracleDescriptor, OracleKind};

/// One logged oracle call.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub point: Gf2Vector,
    pub tag: String,
    pub answer: bool,
}

/// The ordered record of queries and answers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, point: Gf2Vector, tag: &str, answer: bool) {
        self.entries.push(TranscriptEntry {
            point,
            tag: tag.to_owned(),
            answer,
        });
    }
}

/// A query allowance shared by several oracle handles.
#[derive(Clone, Debug)]
pub struct QueryBudget {
    limit: u64,
    used: Arc<AtomicU64>,
}

impl QueryBudget {
    pub fn new(limit: u64) -> Self {
        Self {
            limit,
            used: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    fn charge(&self) -> Result<()> {
        let prev = self.used.fetch_add(1, Ordering::Relaxed);
        if prev >= self.limit {
            self.used.fetch_sub(1, Ordering::Relaxed);
            return Err(LabError::BudgetExceeded { budget: self.limit });
        }
        Ok(())
    }
}

/// A membership oracle `O_S` over F₂ⁿ with a monotone query counter.
#[derive(Clone, Debug)]
pub struct OracleHandle {
    n: u32,
    backend: Backend,
    tag: String,
    queries: u64,
    log: Option<Transcript>,
    budget: Option<QueryBudget>,
}

impl OracleHandle {
    fn with_backend(n: u32, backend: Backend) -> Self {
        Self {
            n,
            backend,
            tag: "O".to_owned(),
            queries: 0,
            log: None,
            budget: None,
        }
    }

    /// Oracle for an explicit set.
    pub fn explicit(set: Gf2Set) -> Self {
        let n = set.dim();
        Self::with_backend(n, Backend::Explicit(Arc::new(set)))
    }

    pub fn explicit_shared(set: Arc<Gf2Set>) -> Self {
        let n = set.dim();
        Self::with_backend(n, Backend::Explicit(set))
    }

    /// `R_ε`: each point is a member independently with probability `density`.
    pub fn lazy_random(n: u32, density: Rational, seed: u64) -> Result<Self> {
        check_vector_dim(n)?;
        if density > Rational::from_integer(1) {
            return Err(LabError::invalid("density", format!("{density} exceeds 1")));
        }
        Ok(Self::with_backend(n, Backend::lazy_random(density, seed)))
    }

    /// The translate `base + z`.
    pub fn shifted(base: &OracleHandle, z: Gf2Vector) -> Result<Self> {
        check_same_dim(base.n, z.dim())?;
        Ok(Self::with_backend(
            base.n,
            Backend::Shifted {
                base: Box::new(base.backend.clone()),
                shift: z.bits(),
            },
        ))
    }

    /// `S(A, B) ∪ extra` over F₂ⁿ⁺², with `extra` a point `(1, 1, s)` given by `s`.
    pub fn embedded(a: &OracleHandle, b: &OracleHandle, extra: Option<Gf2Vector>) -> Result<Self> {
        check_same_dim(a.n, b.n)?;
        if let Some(s) = extra {
            check_same_dim(a.n, s.dim())?;
        }
        check_vector_dim(a.n + 2)?;
        Ok(Self::with_backend(
            a.n + 2,
            Backend::Embedded {
                a: Box::new(a.backend.clone()),
                b: Box::new(b.backend.clone()),
                extra: extra.map(|s| s.bits()),
            },
        ))
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn set_budget(&mut self, budget: Option<QueryBudget>) {
        self.budget = budget;
    }

    /// Starts recording a transcript (clearing any previous one).
    pub fn start_logging(&mut self) {
        self.log = Some(Transcript::default());
    }

    pub fn transcript(&self) -> Option<&Transcript> {
        self.log.as_ref()
    }

    pub fn take_transcript(&mut self) -> Option<Transcript> {
        self.log.take()
    }

    /// Membership of `x`; increments the counter and logs if active.
    pub fn query(&mut self, x: Gf2Vector) -> Result<bool> {
        check_same_dim(self.n, x.dim())?;
        if let Some(b) = &self.budget {
            b.charge()?;
        }
        self.queries += 1;
        let answer = self.backend.eval(x.bits());
        if let Some(log) = &mut self.log {
            log.push(x, &self.tag, answer);
        }
        Ok(answer)
    }

    /// [`OracleHandle::query`] on a raw point index.
    pub fn query_bits(&mut self, x: u64) -> Result<bool> {
        let v = Gf2Vector::new(self.n, x)?;
        self.query(v)
    }

    /// The answer at `x` without charging a query.
    pub fn peek(&self, x: u64) -> bool {
        self.backend.eval(x)
    }

    /// The full set this oracle represents. Does not count as queries.
    pub fn materialize(&self) -> Result<Gf2Set> {
        if self.n > MAX_SET_DIM {
            return Err(LabError::capacity("materialize", self.n, MAX_SET_DIM));
        }
        self.backend.materialize(self.n)
    }

    pub fn descriptor(&self) -> OracleDescriptor {
        OracleDescriptor::of(self.n, &self.backend)
    }

    pub fn from_descriptor(desc: &OracleDescriptor) -> Result<Self> {
        let (n, backend) = desc.build()?;
        Ok(Self::with_backend(n, backend))
    }
}

/// `N_ε(S) = S △ R_ε`: flips each answer of `base` with probability `eps`.
pub fn make_noisy(base: &OracleHandle, eps: Rational, seed: u64) -> Result<OracleHandle> {
    if eps > Rational::new(1, 2) {
        return Err(LabError::invalid(
            "eps",
            format!("{eps} is outside [0, 1/2]"),
        ));
    }
    Ok(OracleHandle::with_backend(
        base.n,
        Backend::noisy(base.backend.clone(), eps, seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Gf2Vector {
        Gf2Vector::from_coords(s).unwrap()
    }

    #[test]
    fn explicit_answers_and_counts() {
        let mut o = OracleHandle::explicit(Gf2Set::from_vectors(2, &[v("00")]).unwrap());
        assert!(!o.query(v("01")).unwrap());
        assert!(o.query(v("00")).unwrap());
        assert_eq!(o.queries(), 2);
        assert!(o.query(v("000")).is_err());
        assert_eq!(o.queries(), 2);
    }

    #[test]
    fn lazy_random_is_deterministic_per_point() {
        let mut o = OracleHandle::lazy_random(20, Rational::new(1, 2), 77).unwrap();
        let x = Gf2Vector::new(20, 12345).unwrap();
        let first = o.query(x).unwrap();
        assert_eq!(o.query(x).unwrap(), first);
        assert_eq!(o.query(x).unwrap(), first);
        assert_eq!(o.queries(), 3);
    }

    #[test]
    fn query_order_does_not_matter() {
        let base = OracleHandle::lazy_random(30, Rational::new(1, 3), 5).unwrap();
        let noisy = make_noisy(&base, Rational::new(1, 5), 6).unwrap();
        let points: Vec<u64> = (0..200u64)
            .map(|i| i.wrapping_mul(0x9e37_79b9) & ((1 << 30) - 1))
            .collect();
        let mut fwd = noisy.clone();
        let mut rev = noisy.clone();
        let a: Vec<bool> = points.iter().map(|&p| fwd.query_bits(p).unwrap()).collect();
        let mut b: Vec<bool> = points
            .iter()
            .rev()
            .map(|&p| rev.query_bits(p).unwrap())
            .collect();
        b.reverse();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = Gf2Set::from_indices(6, [1, 5, 9, 33, 63]).unwrap();
        let base = OracleHandle::explicit(s.clone());
        let noisy = make_noisy(&base, Rational::from_integer(0), 3).unwrap();
        assert_eq!(noisy.materialize().unwrap(), s);
        for x in 0..64 {
            assert_eq!(noisy.peek(x), s.contains(x));
        }
        assert!(make_noisy(&base, Rational::new(3, 5), 3).is_err());
    }

    #[test]
    fn half_noise_decorrelates() {
        let base = OracleHandle::explicit(Gf2Set::full(14).unwrap());
        let mut noisy = make_noisy(&base, Rational::new(1, 2), 123).unwrap();
        let agree = (0..10_000u64)
            .filter(|&x| noisy.query_bits(x).unwrap())
            .count();
        let rate = agree as f64 / 1e4;
        assert!((rate - 0.5).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn materialize_agrees_with_queries() {
        let o = OracleHandle::lazy_random(10, Rational::new(1, 4), 2024).unwrap();
        let m = o.materialize().unwrap();
        assert!((156..=356).contains(&m.len()), "{}", m.len());
        let mut q = o.clone();
        for x in 0..1024 {
            assert_eq!(q.query_bits(x).unwrap(), m.contains(x));
        }
        let big = OracleHandle::lazy_random(29, Rational::new(1, 2), 0).unwrap();
        assert!(matches!(big.materialize(), Err(LabError::Capacity { .. })));
    }

    #[test]
    fn noisy_flip_count_is_binomial() {
        // |N_ε(S) △ S| ~ Bin(2ⁿ, ε): check each of 100 seeds within 5 sd.
        let n = 12;
        let s = OracleHandle::lazy_random(n, Rational::new(1, 2), 1).unwrap();
        let sm = s.materialize().unwrap();
        let eps = Rational::new(1, 8);
        let (mean, sd) = (4096.0 / 8.0, (4096.0f64 * 0.125 * 0.875).sqrt());
        for seed in 0..100 {
            let noisy = make_noisy(&s, eps, seed).unwrap().materialize().unwrap();
            let flips = noisy.symmetric_difference(&sm).unwrap().len() as f64;
            assert!((flips - mean).abs() <= 5.0 * sd, "seed {seed}: {flips}");
        }
    }

    #[test]
    fn noisy_sets_miss_each_point_often() {
        // Pr[s ∉ N_ε(S)] ≥ ε for every s, whether or not s ∈ S.
        let eps = Rational::new(1, 4);
        let s = OracleHandle::explicit(Gf2Set::from_indices(4, [0, 7]).unwrap());
        for point in [0u64, 3] {
            let misses = (0..10_000u64)
                .filter(|&seed| !make_noisy(&s, eps, seed).unwrap().peek(point))
                .count();
            assert!(
                misses as f64 / 1e4 >= 0.25 - 0.02,
                "point {point}: {misses}"
            );
        }
    }

    #[test]
    fn budget_is_shared_and_enforced() {
        let budget = QueryBudget::new(3);
        let mut a = OracleHandle::lazy_random(8, Rational::new(1, 2), 1).unwrap();
        let mut b = a.clone();
        a.set_budget(Some(budget.clone()));
        b.set_budget(Some(budget.clone()));
        a.query_bits(1).unwrap();
        b.query_bits(2).unwrap();
        a.query_bits(3).unwrap();
        assert_eq!(b.query_bits(4), Err(LabError::BudgetExceeded { budget: 3 }));
        assert_eq!(budget.used(), 3);
        assert_eq!(a.queries() + b.queries(), 3);
    }

    #[test]
    fn transcript_logs_every_query() {
        let mut o = OracleHandle::lazy_random(5, Rational::new(1, 2), 9)
            .unwrap()
            .with_tag("A");
        o.start_logging();
        for x in [3, 3, 17, 0] {
            o.query_bits(x).unwrap();
        }
        let t = o.transcript().unwrap();
        assert_eq!(t.len() as u64, o.queries());
        assert_eq!(t.entries[1].point.bits(), 3);
        assert_eq!(t.entries[0].answer, t.entries[1].answer);
        assert!(t.entries.iter().all(|e| e.tag == "A"));
    }

    #[test]
    fn shifted_and_embedded_match_explicit_constructions() {
        let a = OracleHandle::lazy_random(5, Rational::new(1, 2), 10).unwrap();
        let b = OracleHandle::lazy_random(5, Rational::new(1, 2), 11).unwrap();
        let z = Gf2Vector::new(5, 0b10110).unwrap();
        let sa = OracleHandle::shifted(&a, z).unwrap();
        let am = a.materialize().unwrap();
        assert_eq!(sa.materialize().unwrap(), am.shift(z).unwrap());
        let e = OracleHandle::embedded(&a, &b, Some(z)).unwrap();
        let em = e.materialize().unwrap();
        let bm = b.materialize().unwrap();
        assert_eq!(em.len(), 32 + am.len() + bm.len() + 1);
        for x in 0..128u64 {
            assert_eq!(e.peek(x), em.contains(x));
        }
    }
}
