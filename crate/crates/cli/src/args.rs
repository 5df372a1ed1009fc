use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use sumset_core::gf2::Rational;

/// An exact rational written `p/q`. Decimal forms are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio(pub Rational);

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| format!("`{s}` is not of the form p/q"))?;
        let p: u64 = p.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let q: u64 = q.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if q == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Ratio(Rational::new(p, q)))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Experiment configuration: global flags plus one subcommand.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "sumset-lab", version, about = "Shift and sumset testing experiments over F_2^n")]
pub struct ExperimentConfig {
    /// Master seed; trial i uses the i-th child seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Leave wall-clock timings out of the report.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Run the shift tester on two oracles.
    ShiftTest(ShiftTestArgs),
    /// Exact nearest shift between two explicit sets.
    NearestShift(NearestShiftArgs),
    /// Distinguishing game and sham-process failure rate for a query strategy.
    Game(GameArgs),
    /// Embed two sets of F_2^n into F_2^(n+2).
    Embed(EmbedArgs),
    /// Draw a hard instance.
    Sample(SampleArgs),
    /// Build a refutation certificate for a noisy set and check it.
    Refute(RefuteArgs),
    /// Independence numbers of Cayley graphs with random generators.
    Alpha(AlphaArgs),
    /// Count all sumsets of F_2^n.
    CountSumsets(CountArgs),
    /// Greedy many-sums subsets.
    GreedyManysums(ManySumsArgs),
}

/// Where a pair of oracles comes from.
#[derive(Clone, Debug, Args, Serialize)]
#[group(required = true, multiple = true)]
pub struct PairSource {
    /// Oracle A: a set file, a descriptor JSON file, or inline descriptor JSON.
    #[arg(long, requires = "oracle_b", conflicts_with_all = ["yes", "no"])]
    pub oracle_a: Option<String>,
    /// Oracle B, as for `--oracle-a`.
    #[arg(long, requires = "oracle_a")]
    pub oracle_b: Option<String>,
    /// Draw a yes instance: B is a random shift of a uniform A.
    #[arg(long, conflicts_with = "no")]
    pub yes: bool,
    /// Draw a no instance: independent uniform A and B.
    #[arg(long)]
    pub no: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ShiftTestArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub eps: Ratio,
    #[command(flatten)]
    pub source: PairSource,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct NearestShiftArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[command(flatten)]
    pub source: PairSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemArg {
    Shift,
    Sumset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterArg {
    /// The strategy's queries followed by the likelihood-ratio guess.
    Likelihood,
    /// Always answers yes.
    AlwaysYes,
    /// The full shift tester (ignores the budget; shift problem only).
    ShiftTester,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GameArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    #[arg(long)]
    pub n: u32,
    /// Query rounds per instance.
    #[arg(long)]
    pub budget: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// A shipped strategy name.
    #[arg(long, default_value = "random")]
    pub strategy: String,
    #[arg(long, value_enum, default_value_t = TesterArg::Likelihood)]
    pub tester: TesterArg,
    /// Proximity for `--tester shift-tester`.
    #[arg(long, default_value = "1/5")]
    pub eps: Ratio,
    /// Drop the `s = q + q` self-pair from the shift failure rule.
    #[arg(long)]
    pub no_self_pair: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EmbedArgs {
    /// Set file for A.
    #[arg(long)]
    pub a: PathBuf,
    /// Set file for B.
    #[arg(long)]
    pub b: PathBuf,
    /// Also include the point (1,1,v) for this hex vector v.
    #[arg(long)]
    pub extra: Option<String>,
    /// Write the embedded set (text format) here.
    #[arg(long)]
    pub write: Option<PathBuf>,
    /// Check eligibility at this proximity.
    #[arg(long)]
    pub eps: Option<Ratio>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Dyes,
    Dno,
    Syes,
    Sno,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub kind: SampleKind,
    #[arg(long)]
    pub n: u32,
    /// Write the sampled sets (text format) with this path prefix.
    #[arg(long)]
    pub write_prefix: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckArg {
    Exact,
    Pruned,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RefuteArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub eps: Ratio,
    /// Subspace dimension, or `auto`.
    #[arg(long, default_value = "auto")]
    pub d: String,
    /// `random`, `empty`, or a set file.
    #[arg(long, default_value = "random")]
    pub base: String,
    /// Constant in the random-point count.
    #[arg(long, default_value = "1/1")]
    pub c: Ratio,
    /// Consistency check (default: exact for n <= 4, pruned above).
    #[arg(long, value_enum)]
    pub check: Option<CheckArg>,
    #[arg(long, default_value_t = 1 << 24)]
    pub node_budget: u64,
    /// Write the labeled certificate here.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaModeArg {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AlphaArgs {
    #[arg(long)]
    pub n: u32,
    /// Density of the random generator set.
    #[arg(long)]
    pub eps: Ratio,
    #[arg(long, value_enum, default_value_t = AlphaModeArg::Exact)]
    pub mode: AlphaModeArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Branch nodes per exact search before giving up.
    #[arg(long)]
    pub node_budget: Option<u64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CountArgs {
    #[arg(long)]
    pub n: u32,
    /// Write the catalog (one hex membership mask per line) here.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ManySumsArgs {
    /// A set file; otherwise random sets are drawn.
    #[arg(long, conflicts_with_all = ["n", "size"])]
    pub set: Option<PathBuf>,
    #[arg(long, requires = "size")]
    pub n: Option<u32>,
    /// Size of each random set.
    #[arg(long, requires = "n")]
    pub size: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!("1/5".parse::<Ratio>().unwrap().0, Rational::new(1, 5));
        assert_eq!("2/4".parse::<Ratio>().unwrap().to_string(), "1/2");
        assert!("0.2".parse::<Ratio>().is_err());
        assert!("1/0".parse::<Ratio>().is_err());
        assert!("1".parse::<Ratio>().is_err());
        assert!("-1/2".parse::<Ratio>().is_err());
    }

    #[test]
    fn parser_is_consistent() {
        use clap::CommandFactory;
        ExperimentConfig::command().debug_assert();
    }
}
