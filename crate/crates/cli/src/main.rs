//! `acidfront` command-line driver.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "acidfront", version, about = "Tumor acid-front simulation and delta1 estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; each run writes into a fresh subdirectory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides ACIDFRONT_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Base seed for noise and random starts.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the forward problem and dump the trajectory.
    Simulate(Common),
    /// Estimate delta1 from a data directory.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Directory written by `simulate`.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run recovery experiments over lists of true delta1 and noise levels.
    Experiment(Common),
}

/// Exit status for bad input or configuration.
const EXIT_USAGE: u8 = 1;
/// Exit status for a numerical failure.
const EXIT_NUMERICAL: u8 = 2;

fn load(common: &Common) -> Result<RunConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Ok(v) = std::env::var("ACIDFRONT_WORKERS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("ACIDFRONT_WORKERS = `{v}` is not a worker count"))?;
        cfg.workers = Some(n);
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (common, data) = match &cli.command {
        Command::Simulate(c) | Command::Experiment(c) => (c, None),
        Command::Estimate { common, data } => (common, data.clone()),
    };
    let mut cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if data.is_some() {
        cfg.data = data;
    }

    let result = match cli.command {
        Command::Simulate(_) => run::simulate(&cfg),
        Command::Estimate { .. } => run::estimate(&cfg),
        Command::Experiment(_) => run::experiment(&cfg),
    };
    match result {
        Ok(dir) => {
            println!("output: {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
