//! Batch driver: `witten-decay <task> --config <path> [--out <dir>] [--seed <u64>]`.
//!
//! Exit status is 0 when every check passes, 1 when a check fails, 2 on bad input or I/O failure.

mod config;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::Parser;
use witten_core::Error;

use config::{config_err, ConfigError, Task};
use output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "witten-decay", version, about = "Correlation decay checks for lattice spin models")]
struct Args {
    task: Task,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let cfg = config::parse(&text)?;
    if let Some(t) = cfg.task {
        if t != args.task {
            return Err(config_err(format!(
                "config is for task `{}` but `{}` was requested",
                t.name(),
                args.task.name()
            )));
        }
    }
    let dir = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let ctx = tasks::Context {
        cfg: &cfg,
        model: cfg.hamiltonian()?,
        seed: cfg.seed(args.seed),
        out: OutDir::create(&dir)?,
    };
    match args.task {
        Task::Certify => tasks::certify(&ctx),
        Task::Solve => tasks::solve(&ctx),
        Task::Cov => tasks::cov(&ctx),
        Task::Sample => tasks::sample(&ctx),
        Task::Decay => tasks::decay(&ctx),
        Task::Crosscheck => tasks::crosscheck(&ctx),
    }
}

fn is_input_error(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<ConfigError>().is_some() || e.chain().any(|c| c.is::<std::io::Error>()) {
        return true;
    }
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::GridDimensionTooLarge { .. }
                | Error::BudgetExceeded { .. }
                | Error::InvalidParameter(..)
                | Error::SiteOutOfRange { .. }
                | Error::DimensionMismatch { .. }
                | Error::EmptyExtents
                | Error::ZeroExtent { .. }
                | Error::TooFewSamples { .. }
                | Error::OverlappingSupports
                | Error::EmptySiteSet
        )
    )
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("witten-decay {}: one or more checks failed", args.task.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("witten-decay {}: error: {e:#}", args.task.name());
            ExitCode::from(if is_input_error(&e) { 2 } else { 1 })
        }
    }
}
