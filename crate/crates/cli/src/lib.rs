//! Config-driven experiment runner for the cavity simulation library.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, OutputFormat};
use report::{OutputEntry, RunReport};

/// Environment variable providing the default worker-pool size.
pub const THREADS_ENV: &str = "DCE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "dce",
    about = "Cavity photon-generation experiment runner",
    version
)]
pub struct Cli {
    /// Path to the experiment config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the output path from the config.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Override the output format from the config.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker-pool size for sweeps; defaults to the DCE_THREADS environment
    /// variable, then to the number of CPUs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved flag: every command is already RNG-free, so this is rejected
    /// until it gains a meaning.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Floquet stability map over a theta grid.
    StabilityMap,
    /// Open-system evolution trace.
    Evolve,
    /// Quantum photon observable next to the classical model.
    CompareClassical,
    /// Entanglement occurrence times over a parameter sweep.
    Occurrence,
    /// Large-time photon and entanglement asymptotics.
    Asymptotics,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::StabilityMap => "stability-map",
            Command::Evolve => "evolve",
            Command::CompareClassical => "compare-classical",
            Command::Occurrence => "occurrence",
            Command::Asymptotics => "asymptotics",
        }
    }
}

fn thread_count(cli: &Cli) -> Result<Option<usize>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be >= 1");
        }
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(text) => {
            let n: usize = text
                .parse()
                .with_context(|| format!("invalid {THREADS_ENV} value `{text}`"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be >= 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Execute a parsed invocation and return the report that `main` prints.
pub fn run(cli: &Cli) -> Result<RunReport> {
    if cli.seedless {
        bail!("--seedless is reserved and not yet accepted");
    }
    let started = Instant::now();
    let config_path = cli.config.as_ref().context("--config <path> is required")?;
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("cannot read {}", config_path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(path) = &cli.output {
        cfg.output.path = path.display().to_string();
    }
    if let Some(format) = cli.format {
        cfg.output.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }

    let table = match thread_count(cli)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("failed to build worker pool")?
            .install(|| dispatch(&cli.command, &cfg)),
        None => dispatch(&cli.command, &cfg),
    }?;

    let out_path = PathBuf::from(&cfg.output.path);
    let bytes = table.write(&out_path, cfg.output.format)?;

    let mut report = RunReport::new(cli.command.name(), cfg.to_toml()?);
    report.outputs.push(OutputEntry {
        path: cfg.output.path.clone(),
        rows: table.rows.len(),
        bytes,
    });
    report.wall_time_ms = started.elapsed().as_millis();
    Ok(report)
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> Result<output::Table> {
    match command {
        Command::StabilityMap => commands::cmd_stability_map(cfg),
        Command::Evolve => commands::cmd_evolve(cfg),
        Command::CompareClassical => commands::cmd_compare_classical(cfg),
        Command::Occurrence => commands::cmd_occurrence(cfg),
        Command::Asymptotics => commands::cmd_asymptotics(cfg),
    }
}
