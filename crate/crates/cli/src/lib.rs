//! The `sumset-lab` experiment runner.
//!
//! [`run`] turns an [`ExperimentConfig`] into a [`Report`]; the binary only
//! parses arguments and writes the rendered report.

pub mod args;
mod commands;
pub mod report;

use std::time::Instant;

use anyhow::Result;

pub use args::{Command, ExperimentConfig, Format, Ratio};
pub use report::Report;

/// Runs one experiment. Timings are recorded unless `no_timing` is set.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let echo = serde_json::to_value(config)?;
    let mut report = match &config.command {
        Command::ShiftTest(a) => commands::shift_test(a, config.seed, echo)?,
        Command::NearestShift(a) => commands::nearest_shift(a, config.seed, echo)?,
        Command::Game(a) => commands::game(a, config.seed, echo)?,
        Command::Embed(a) => commands::embed(a, echo)?,
        Command::Sample(a) => commands::sample(a, config.seed, echo)?,
        Command::Refute(a) => commands::refute(a, config.seed, echo)?,
        Command::Alpha(a) => commands::alpha(a, config.seed, echo)?,
        Command::CountSumsets(a) => commands::count_sumsets(a, echo)?,
        Command::GreedyManysums(a) => commands::greedy_manysums(a, config.seed, echo)?,
    };
    if !config.no_timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}
