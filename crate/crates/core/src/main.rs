use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spinsense::commands;
use spinsense::config::RunConfig;
use spinsense::oracle::DephasingConvention;
use spinsense::verify::VerifyOptions;
use spinsense::Protocol;

/// Single-spin detection sensitivity: single, separable and GHZ-entangled probes.
#[derive(Debug, Parser)]
#[command(name = "spinsense", version)]
struct Cli {
    /// JSON configuration; defaults to NV-centre parameters when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the machine-readable output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal entangled-probe geometry and probe counts.
    Optimize,
    /// Sensitivity ratios against the standoff distance (CSV).
    Sweep,
    /// Total measurement time needed to reach δs = 1 for each protocol.
    DetectTime,
    /// Run the oracle suite; non-zero exit on any failing check.
    Verify {
        /// Integrate the master equation with the half-rate t/(4T₂²) prefactor.
        #[arg(long)]
        wrong_envelope: bool,
    },
    /// Monte Carlo estimate of δs for a small probe register.
    Simulate {
        #[arg(long, default_value = "entangled")]
        protocol: Protocol,
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::Optimize => emit(&cli.out, &commands::optimize_json(&config)?)?,
        Command::Sweep => {
            emit(&cli.out, &commands::sweep_csv(&config)?)?;
            eprint!("{}", commands::sweep_summary(&config)?);
        }
        Command::DetectTime => emit(&cli.out, &commands::detect_time_json(&config)?)?,
        Command::Verify { wrong_envelope } => {
            let opts = VerifyOptions {
                convention: if wrong_envelope {
                    DephasingConvention::HalfRate
                } else {
                    DephasingConvention::Normative
                },
            };
            let report = commands::verify(&config, opts)?;
            print!("{}", report.render());
            if let Some(path) = &cli.out {
                std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            return Ok(report.all_passed);
        }
        Command::Simulate { protocol, trials } => {
            emit(&cli.out, &commands::simulate_json(&config, protocol, trials)?)?
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
