use std::process::ExitCode;

use clap::Parser;
use sumset_lab::{run, ExperimentConfig};

fn main() -> ExitCode {
    let config = ExperimentConfig::parse();
    if let Some(t) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(&config).and_then(|report| {
        let text = report.render(config.format)?;
        match &config.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
