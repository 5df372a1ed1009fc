use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use sumset_core::bruteforce::enumerate_sumsets;
use sumset_core::gf2::{sumset, vol, CayleyGraph, Gf2Set, Gf2Vector, Rational};
use sumset_core::hardness::{
    embed as embed_sets, is_eligible, sample_dno, sample_dyes, sample_sno, sample_syes, shift_oracles, Builtin,
    Label, Problem, ShamOptions, ShamStats, Tester,
};
use sumset_core::oracle::{make_noisy, OracleDescriptor, OracleHandle};
use sumset_core::prf::{domain, Prf};
use sumset_core::refute::{
    build_certificate, check_zero_certificate, consistent_root_bound, greedy_many_sums,
    independence_number_with_budget, AlphaMode, CheckMode, CheckOutcome, PRUNED_MAX_DIM, ROOT_BOUND_MAX_DIM,
};
use sumset_core::shift::{expected_queries, nearest_shift as closest_shift, shift_tester};
use sumset_core::stats::proportion_halfwidth;

use crate::args::*;
use crate::report::Report;

fn ratio_str(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_unit_interval(name: &str, eps: Rational) -> Result<()> {
    if *eps.numer() == 0 || eps > Rational::from_integer(1) {
        bail!("invalid {name}: {eps} is outside (0, 1]");
    }
    Ok(())
}

fn hex_list(s: &Gf2Set) -> Vec<String> {
    s.iter().map(|x| format!("{x:x}")).collect()
}

/// A set file, a descriptor JSON file, or inline descriptor JSON.
fn load_oracle(spec: &str) -> Result<OracleHandle> {
    let trimmed = spec.trim_start();
    let desc: Option<OracleDescriptor> = if trimmed.starts_with('{') {
        Some(serde_json::from_str(trimmed).context("parsing inline oracle descriptor")?)
    } else if spec.ends_with(".json") {
        let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        Some(serde_json::from_str(&text).with_context(|| format!("parsing descriptor {spec}"))?)
    } else {
        None
    };
    Ok(match desc {
        Some(d) => OracleHandle::from_descriptor(&d)?,
        None => OracleHandle::explicit(Gf2Set::load(spec)?),
    })
}

fn load_set(path: &Path) -> Result<Gf2Set> {
    Ok(Gf2Set::load(path)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The oracle pair named by `source`, with the hidden shift of a sampled yes instance.
fn pair(source: &PairSource, n: Option<u32>, seed: u64) -> Result<(OracleHandle, OracleHandle, Option<Gf2Vector>)> {
    let (a, b, s) = match (&source.oracle_a, &source.oracle_b) {
        (Some(a), Some(b)) => (load_oracle(a)?, load_oracle(b)?, None),
        _ => {
            let n = n.ok_or_else(|| anyhow!("invalid n: required with --yes/--no"))?;
            let label = if source.yes { Label::Yes } else { Label::No };
            shift_oracles(label, n, seed)?
        }
    };
    if let Some(n) = n {
        if a.dim() != n || b.dim() != n {
            bail!("invalid n: oracles have dimensions {} and {}, not {n}", a.dim(), b.dim());
        }
    }
    Ok((a, b, s))
}

pub fn shift_test(args: &ShiftTestArgs, seed: u64, echo: Value) -> Result<Report> {
    check_unit_interval("eps", args.eps.0)?;
    let (mut oa, mut ob, hidden) = pair(&args.source, args.n, seed)?;
    let v = shift_tester(&mut oa, &mut ob, args.eps.0, Prf::new(seed).subseed(2))?;
    let mut r = Report::new("shift-test", echo);
    r.set("n", oa.dim());
    r.set("verdict", v.verdict);
    r.set("witness", v.witness.map(|w| w.to_string()));
    r.set("repetitions", v.repetitions);
    r.set("expected_queries", expected_queries(oa.dim(), args.eps.0)?);
    r.set("hidden_shift", hidden.map(|s| s.to_string()));
    r.queries = oa.queries() + ob.queries();
    debug_assert_eq!(r.queries, v.queries_used);
    Ok(r)
}

pub fn nearest_shift(args: &NearestShiftArgs, seed: u64, echo: Value) -> Result<Report> {
    let (oa, ob, hidden) = pair(&args.source, args.n, seed)?;
    let (a, b) = (oa.materialize()?, ob.materialize()?);
    let (z, d) = closest_shift(&a, &b)?;
    let mut r = Report::new("nearest-shift", echo);
    r.set("n", a.dim());
    r.set("z", z.to_string());
    r.set("distance", ratio_str(d));
    r.set("distance_value", to_f64(d));
    r.set("hidden_shift", hidden.map(|s| s.to_string()));
    Ok(r)
}

pub fn game(args: &GameArgs, seed: u64, echo: Value) -> Result<Report> {
    let problem = match args.problem {
        ProblemArg::Shift => Problem::Shift,
        ProblemArg::Sumset => Problem::Sumset,
    };
    let strategy = Builtin::parse(&args.strategy)?;
    let tester = match args.tester {
        TesterArg::Likelihood => Tester::Likelihood {
            strategy: &strategy,
            rounds: args.budget,
        },
        TesterArg::AlwaysYes => Tester::AlwaysYes,
        TesterArg::ShiftTester => {
            check_unit_interval("eps", args.eps.0)?;
            Tester::ShiftTester { eps: args.eps.0 }
        }
    };
    let g = tester.play(problem, args.n, args.trials, seed)?;
    let opts = ShamOptions {
        include_self_pair: !args.no_self_pair,
    };
    let sham = ShamStats::run(problem, &strategy, args.n, args.budget, args.trials, seed, opts)?;
    let mut r = Report::new("game", echo);
    r.set("trials", g.trials);
    r.set("aborted", g.aborted);
    r.set("advantage", g.advantage);
    r.set("ci_halfwidth", g.ci_halfwidth);
    r.set("yes_rate_on_yes", g.yes_given_yes.rate());
    r.set("yes_rate_on_no", g.yes_given_no.rate());
    r.set("query_budget_per_instance", tester.query_budget(problem));
    r.set("failure_rate", sham.failures.rate());
    r.set("failure_ci_halfwidth", proportion_halfwidth(sham.failures.rate(), sham.failures.trials));
    r.set("self_pair_failures", sham.self_pair_failures);
    r.set(
        "note",
        "advantage is the empirical distinguishing advantage, used in place of the total variation distance, which is not computed",
    );
    r.queries = g.queries;
    Ok(r)
}

fn volumes(s: &Gf2Set) -> Result<Value> {
    let mut m = serde_json::Map::new();
    for (b1, b2) in [(false, false), (true, false), (false, true), (true, true)] {
        m.insert(format!("vol{}{}", b1 as u8, b2 as u8), json!(ratio_str(vol(s, b1, b2)?)));
    }
    Ok(Value::Object(m))
}

pub fn embed(args: &EmbedArgs, echo: Value) -> Result<Report> {
    let (a, b) = (load_set(&args.a)?, load_set(&args.b)?);
    let s = match &args.extra {
        Some(hex) => {
            let v = u64::from_str_radix(hex.trim_start_matches("0x"), 16)
                .map_err(|e| anyhow!("invalid extra: {e}"))?;
            let extra = Gf2Vector::new(a.dim(), v)?;
            OracleHandle::embedded(&OracleHandle::explicit(a), &OracleHandle::explicit(b), Some(extra))?
                .materialize()?
        }
        None => embed_sets(&a, &b)?,
    };
    let mut r = Report::new("embed", echo);
    r.set("n", s.dim());
    r.set("size", s.len());
    r.set("volumes", volumes(&s)?);
    if let Some(eps) = args.eps {
        r.set("eligible", is_eligible(&s, eps.0)?);
    }
    if let Some(path) = &args.write {
        write_text(path, &s.to_text())?;
    }
    Ok(r)
}

pub fn sample(args: &SampleArgs, seed: u64, echo: Value) -> Result<Report> {
    let n = args.n;
    let mut r = Report::new("sample", echo);
    r.set("n", n);
    let write = |suffix: &str, s: &Gf2Set| -> Result<()> {
        if let Some(prefix) = &args.write_prefix {
            let mut p = prefix.clone().into_os_string();
            p.push(suffix);
            write_text(Path::new(&p), &s.to_text())?;
        }
        Ok(())
    };
    match args.kind {
        SampleKind::Dyes | SampleKind::Dno => {
            let inst = if args.kind == SampleKind::Dyes {
                sample_dyes(n, seed)?
            } else {
                sample_dno(n, seed)?
            };
            r.set("label", inst.label);
            r.set("size_a", inst.a.len());
            r.set("size_b", inst.b.len());
            r.set("hidden_shift", inst.hidden_shift.map(|s| s.to_string()));
            let (z, d) = closest_shift(&inst.a, &inst.b)?;
            r.set("nearest_shift", z.to_string());
            r.set("nearest_shift_distance", ratio_str(d));
            write(".a.txt", &inst.a)?;
            write(".b.txt", &inst.b)?;
        }
        SampleKind::Syes | SampleKind::Sno => {
            let inst = if args.kind == SampleKind::Syes {
                sample_syes(n, seed)?
            } else {
                sample_sno(n, seed)?
            };
            r.set("label", inst.label);
            r.set("dim", inst.s.dim());
            r.set("size", inst.s.len());
            r.set("volumes", volumes(&inst.s)?);
            r.set("hidden_point", inst.hidden_point.map(|p| p.to_string()));
            r.set("root_attached", inst.root.is_some());
            if let Some(root) = &inst.root {
                r.set("root_verified", sumset(root) == inst.s);
                write(".root.txt", root)?;
            }
            write(".s.txt", &inst.s)?;
        }
    }
    Ok(r)
}

pub fn refute(args: &RefuteArgs, seed: u64, echo: Value) -> Result<Report> {
    let n = args.n;
    let eps = args.eps.0;
    let prf = Prf::new(seed);
    let base = match args.base.as_str() {
        "random" => OracleHandle::lazy_random(n, Rational::new(1, 2), prf.subseed(0))?,
        "empty" => OracleHandle::explicit(Gf2Set::empty(n)?),
        path => {
            let set = Gf2Set::load(path)?;
            if set.dim() != n {
                bail!("invalid base: set has dimension {}, not {n}", set.dim());
            }
            OracleHandle::explicit(set)
        }
    };
    let d = match args.d.as_str() {
        "auto" => None,
        s => Some(s.parse::<u32>().map_err(|_| anyhow!("invalid d: `{s}` is neither auto nor an integer"))?),
    };
    let mut noisy = make_noisy(&base, eps, prf.subseed(1))?;
    let cert = build_certificate(&mut noisy, d, eps, prf.subseed(2), args.c.0)?;
    let mode = match args.check {
        Some(CheckArg::Exact) => Some(CheckMode::Exact),
        Some(CheckArg::Pruned) => Some(CheckMode::Pruned {
            node_budget: args.node_budget,
        }),
        None if n <= 4 => Some(CheckMode::Exact),
        None if n <= PRUNED_MAX_DIM => Some(CheckMode::Pruned {
            node_budget: args.node_budget,
        }),
        None => None,
    };
    let mut r = Report::new("refute", echo);
    r.set("n", n);
    r.set("d", cert.meta.d);
    r.set("m", cert.meta.m);
    r.set("distinct_points", cert.len());
    r.set("calibration_constant", args.c.to_string());
    match mode.map(|m| check_zero_certificate(&cert, m)).transpose()? {
        Some(CheckOutcome::Refuted) => r.set("verdict", "refuted"),
        Some(CheckOutcome::Consistent { root }) => {
            r.set("verdict", "consistent");
            r.set("root", hex_list(&root));
        }
        Some(CheckOutcome::Unknown { nodes }) => {
            r.set("verdict", "unknown");
            r.set("nodes", nodes);
        }
        None => {
            r.set("verdict", "unchecked");
            r.set(
                "note",
                format!("certificates are only checked for n <= {PRUNED_MAX_DIM}"),
            );
        }
    }
    if cert.meta.d <= ROOT_BOUND_MAX_DIM {
        let fam = consistent_root_bound(&cert.subspace_members()?, n, eps, args.node_budget)?;
        r.set(
            "root_bound",
            json!({
                "excluded_in_subspace": fam.excluded.len(),
                "per_coset": fam.per_coset.to_string(),
                "log2_bound": fam.log2_bound,
                "overflow": matches!(fam.bound, sumset_core::refute::Bound::Overflow),
                "calibration": fam.calibration,
                "budget_exhausted": fam.budget_exhausted,
            }),
        );
    }
    if let Some(path) = &args.certificate {
        write_text(path, &cert.to_text())?;
    }
    r.queries = noisy.queries();
    debug_assert_eq!(r.queries, cert.meta.queries);
    Ok(r)
}

pub fn alpha(args: &AlphaArgs, seed: u64, echo: Value) -> Result<Report> {
    let n = args.n;
    let eps = args.eps.0;
    check_unit_interval("eps", eps)?;
    let mode = match args.mode {
        AlphaModeArg::Exact => AlphaMode::Exact,
        AlphaModeArg::Greedy => AlphaMode::Greedy,
    };
    let prf = Prf::new(seed);
    let budget = args.node_budget.unwrap_or(u64::MAX);
    let runs = (0..args.trials)
        .into_par_iter()
        .map(|i| {
            let d = OracleHandle::lazy_random(n, eps, prf.subseed(i))?.materialize()?;
            Ok(independence_number_with_budget(&CayleyGraph::new(d), mode, budget)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = (n * n) as f64 / to_f64(eps).powi(2);
    let max = runs.iter().map(|x| x.value).max().expect("trials >= 1");
    let mut r = Report::new("alpha", echo);
    r.set("n", n);
    r.set(
        "runs",
        runs.iter()
            .map(|x| json!({"alpha": x.value, "proved": x.proved, "nodes": x.nodes}))
            .collect::<Vec<_>>(),
    );
    r.set("max_alpha", max);
    r.set("mean_alpha", runs.iter().map(|x| x.value as f64).sum::<f64>() / runs.len() as f64);
    r.set("max_ratio", max as f64 / scale);
    r.set("all_proved", runs.iter().all(|x| x.proved));
    Ok(r)
}

pub fn count_sumsets(args: &CountArgs, echo: Value) -> Result<Report> {
    let cat = enumerate_sumsets(args.n)?;
    let n = args.n;
    let envelope = (1u64 << (n - 1)) as f64 + 20.0 * (n * n) as f64;
    let mut r = Report::new("count-sumsets", echo);
    r.set("n", n);
    r.set("count", cat.count());
    r.set("log2_count", (cat.count() as f64).log2());
    r.set("log2_envelope", envelope);
    if let Some(path) = &args.catalog {
        let mut text = format!("# sumsets of F_2^{n}: {} membership masks\n", cat.count());
        for m in cat.masks() {
            text.push_str(&format!("{m:x}\n"));
        }
        write_text(path, &text)?;
    }
    Ok(r)
}

fn random_set(n: u32, size: u64, seed: u64) -> Result<Gf2Set> {
    if size == 0 || size > 1 << n {
        bail!("invalid size: {size} is outside [1, 2^{n}]");
    }
    let prf = Prf::new(seed);
    let mut a = Gf2Set::empty(n)?;
    let mut points = prf.words(domain::SAMPLE_POINT, 0);
    while a.len() < size {
        a.insert(points.next().expect("endless stream") & ((1 << n) - 1))?;
    }
    Ok(a)
}

pub fn greedy_manysums(args: &ManySumsArgs, seed: u64, echo: Value) -> Result<Report> {
    let prf = Prf::new(seed);
    let inputs: Vec<Gf2Set> = match (&args.set, args.n, args.size) {
        (Some(path), _, _) => vec![load_set(path)?],
        (None, Some(n), Some(size)) => (0..args.trials)
            .map(|i| random_set(n, size, prf.subseed(i)))
            .collect::<Result<_>>()?,
        _ => bail!("invalid input: give --set, or --n with --size"),
    };
    let runs = inputs
        .par_iter()
        .map(|a| {
            let b = greedy_many_sums(a)?;
            let (k, s) = (b.len(), sumset(&b).len());
            Ok(json!({
                "size": a.len(),
                "subset_size": k,
                "subset_sums": s,
                "size_ok": k * k >= a.len(),
                "many_sums_ok": 4 * s >= k * k,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let violations = runs
        .iter()
        .filter(|v| v["size_ok"] != json!(true) || v["many_sums_ok"] != json!(true))
        .count();
    let mut r = Report::new("greedy-manysums", echo);
    r.set("trials", runs.len());
    r.set("violations", violations);
    r.set("runs", runs);
    Ok(r)
}
