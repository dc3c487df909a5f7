//! `qbath`: exact correlations, measurement simulation, reconstruction and
//! dynamics validation driven by a TOML experiment config.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::error;

use commands::{EstimateMode, Run};
use config::{Experiment, ExperimentConfig};
use error::{CliError, CliResult};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "qbath", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory; every output path is relative to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Source of the sequence averages used by `reconstruct`.
    #[arg(long, global = true, value_enum, default_value_t = EstimateMode::Auto)]
    mode: EstimateMode,
    /// Overrides the config shot count.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Tensor read by `validate`, relative to the run directory.
    #[arg(long, global = true, default_value = "correlations.json")]
    tensor: PathBuf,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Exact bath correlation tensor.
    Correlations,
    /// Exact sequence averages and sampled measurement records.
    Simulate,
    /// Correlations recovered from records or exact averages.
    Reconstruct,
    /// Cumulant-predicted dephasing against exact reduced dynamics.
    Validate,
    /// All four stages in order.
    Pipeline,
}

#[derive(Clone, Copy)]
enum Stage {
    Correlations,
    Simulate,
    Reconstruct,
    Validate,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Correlations => "correlations",
            Stage::Simulate => "simulate",
            Stage::Reconstruct => "reconstruct",
            Stage::Validate => "validate",
        }
    }
}

impl Command {
    fn stages(self) -> &'static [Stage] {
        match self {
            Command::Correlations => &[Stage::Correlations],
            Command::Simulate => &[Stage::Simulate],
            Command::Reconstruct => &[Stage::Reconstruct],
            Command::Validate => &[Stage::Validate],
            Command::Pipeline => &[
                Stage::Correlations,
                Stage::Simulate,
                Stage::Reconstruct,
                Stage::Validate,
            ],
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("QBATH_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "QBATH_THREADS = `{value}` is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(shots) = cli.shots {
        config.shots = shots;
    }
    if let Some(out) = cli.out {
        config.out = out;
    }
    let exp = Experiment::prepare(config)?;
    let dir = exp.config.out.clone();
    std::fs::create_dir_all(&dir)?;

    let hash = exp.config.hash();
    let mut manifest = RunManifest::open(&dir, &hash, exp.config.seed);
    let runner = Run {
        exp: &exp,
        dir: dir.clone(),
        mode: cli.mode,
        tensor: cli.tensor,
    };
    for &stage in cli.command.stages() {
        let start = Instant::now();
        let outputs = match stage {
            Stage::Correlations => runner.correlations(),
            Stage::Simulate => runner.simulate(),
            Stage::Reconstruct => runner.reconstruct(),
            Stage::Validate => runner.validate(),
        }?;
        manifest.record(stage.name(), outputs, start.elapsed().as_secs_f64());
        manifest.save(&dir)?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        error!("{e}");
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
