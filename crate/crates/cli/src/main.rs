//! `waveop`: runs the kernel laboratory pipeline and writes its artifacts.
//!
//! Exit status: 0 success, 1 acceptance failures, 2 malformed config or
//! missing artifacts, 3 numerical failure.

mod config;
mod pipeline;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ConfigError, ScenarioConfig};
use pipeline::{Pipeline, Stage};
use report::{emit_report, AcceptanceFailure, MissingArtifacts};

#[derive(Parser)]
#[command(
    name = "waveop",
    version,
    about = "Low-energy wave-operator kernel laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config (JSON). Fields left out take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in scenario: full, l1-dichotomy, l2-cancellation, lemma-suite, wlog.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    scenario: Option<String>,
    /// Artifact directory [default: config output_dir, else waveop-out/<scenario>].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the numerical kernels.
    #[arg(long, global = true, env = "WAVEOP_THREADS", value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tune the coupling and write the threshold eigenstates.
    Eigensolve,
    /// Tabulate the oscillatory lambda-integrals.
    BuildTable,
    /// Assemble the kernel grids and draw heatmaps.
    KernelGrid,
    /// Fit regime bounds and decay exponents on the kernel grids.
    FitBounds,
    /// Run the L^p, certification and convolution probes.
    Probes,
    /// Aggregate an existing artifact directory into report.md / report.json.
    Report,
    /// Every stage, the acceptance checks, and the report.
    All,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, ConfigError> {
    match (&cli.config, &cli.scenario) {
        (Some(path), _) => ScenarioConfig::load(path),
        (None, Some(name)) => ScenarioConfig::builtin(name),
        (None, None) => ScenarioConfig::builtin("full"),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("waveop-out").join(&cfg.name));
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let stage = match cli.command {
        Command::Eigensolve => Some(Stage::Eigensolve),
        Command::BuildTable => Some(Stage::BuildTable),
        Command::KernelGrid => Some(Stage::KernelGrid),
        Command::FitBounds => Some(Stage::FitBounds),
        Command::Probes => Some(Stage::Probes),
        Command::Report | Command::All => None,
    };
    if let Some(stage) = stage {
        let p = Pipeline::new(cfg, out)?;
        p.write_manifest(&[stage])?;
        p.run(stage)?;
        eprintln!("{}: artifacts in {}", stage.name(), p.out.display());
        return Ok(());
    }
    if let Command::All = cli.command {
        let p = Pipeline::new(cfg.clone(), out.clone())?;
        p.write_manifest(&Stage::ALL)?;
        for stage in Stage::ALL {
            eprintln!("stage {}", stage.name());
            p.run(stage)?;
        }
    }
    let report = emit_report(&out, &cfg)?;
    println!("{}", out.join("report.md").display());
    let failing = report.failing();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(AcceptanceFailure(failing).into())
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain()
        .any(|c| c.is::<ConfigError>() || c.is::<MissingArtifacts>())
    {
        2
    } else if e.chain().any(|c| c.is::<AcceptanceFailure>()) {
        1
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
