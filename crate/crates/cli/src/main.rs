use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod output;
mod run;

use config::{ExperimentConfig, Format};

#[derive(Parser, Debug)]
#[command(name = "contperc", version, about = "Continuum percolation experiments on the random connection model")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications (overrides the config).
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Worker threads [default: config, then CONTPERC_WORKERS, then all cores].
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Emit a Poisson point sample.
    Sample,
    /// Emit the edge list and degree statistics of one graph.
    Graph,
    /// Estimate the crossing probability of the disc window.
    Theta,
    /// Bisect for the pseudo-critical value, or sweep a grid.
    Threshold,
    /// Run a finite-size inequality-direction experiment.
    Verify,
    /// Compare a finite difference with the pivotality integral.
    Russo,
    /// Demonstrate the site-in-bond coupling.
    Couple,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Graph => "graph",
            Command::Theta => "theta",
            Command::Threshold => "threshold",
            Command::Verify => "verify",
            Command::Russo => "russo",
            Command::Couple => "couple",
        }
    }
}

fn effective_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    cfg.workers = match (cli.workers, cfg.workers) {
        (Some(w), _) | (None, Some(w)) => Some(w),
        (None, None) => match std::env::var("CONTPERC_WORKERS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                anyhow::anyhow!("CONTPERC_WORKERS: expected a positive integer, got {v:?}")
            })?),
            Err(_) => None,
        },
    };
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let result = effective_config(&cli).and_then(|cfg| {
        cfg.validate(name)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers.unwrap_or(0))
            .build()?;
        pool.install(|| run::dispatch(name, &cfg))
    });
    match result {
        Ok(run::Outcome::Success) => ExitCode::SUCCESS,
        Ok(run::Outcome::NotConfirmed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
