//! `sqg`: simulate the dissipative surface quasi-geostrophic equation,
//! run the verification suites, and inspect checkpoints.
//!
//! Exit status: 0 on success, 1 on operational errors (bad config, I/O),
//! 2 on a scientific negative (blowup flag, no contraction, failed
//! verdict).

// `!(x > y)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod checkpoint;
mod config;
mod manifest;
mod picard;
mod simulate;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::manifest::{OutputDir, TerminationStatus};

#[derive(Parser)]
#[command(
    name = "sqg",
    version,
    about = "Dissipative SQG simulator and Littlewood–Paley verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation with the regularity monitor.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Successive approximations and their difference norms.
    Picard {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Inspect checkpoint files.
    Checkpoint {
        #[command(subcommand)]
        action: CheckpointAction,
    },
    /// Check run manifests.
    Manifest {
        #[command(subcommand)]
        action: ManifestAction,
    },
}

#[derive(Subcommand)]
enum CheckpointAction {
    /// Print the header fields.
    Info { path: PathBuf },
    /// Largest mode-wise coefficient difference.
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum ManifestAction {
    /// Re-hash every listed artifact.
    Verify { path: PathBuf },
}

fn exit_code(status: TerminationStatus) -> ExitCode {
    match status {
        TerminationStatus::Completed => ExitCode::SUCCESS,
        TerminationStatus::Error => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

/// Load the config, run `body` in the output directory, and always leave a
/// manifest behind once the directory exists.
fn with_outputs(
    command: &str,
    config_path: &Path,
    body: impl FnOnce(&RunConfig, &mut OutputDir) -> Result<TerminationStatus>,
) -> Result<TerminationStatus> {
    let config = RunConfig::load(config_path)?;
    let mut out = OutputDir::create(config.output_dir())?;
    match body(&config, &mut out) {
        Ok(status) => {
            out.finish(command, &config, status, None)?;
            Ok(status)
        }
        Err(e) => {
            out.finish(
                command,
                &config,
                TerminationStatus::Error,
                Some(format!("{e:#}")),
            )?;
            Err(e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<TerminationStatus> {
    match cli.command {
        Command::Simulate { config } => with_outputs("simulate", &config, simulate::run),
        Command::Verify { suite, config } => {
            with_outputs(&format!("verify {}", suite.name()), &config, |c, o| {
                verify::run(suite, c, o)
            })
        }
        Command::Picard { config, k_max } => {
            with_outputs("picard", &config, |c, o| picard::run(c, k_max, o))
        }
        Command::Checkpoint { action } => {
            match action {
                CheckpointAction::Info { path } => checkpoint::info(&path)?,
                CheckpointAction::Diff { a, b } => checkpoint::diff(&a, &b)?,
            }
            Ok(TerminationStatus::Completed)
        }
        Command::Manifest {
            action: ManifestAction::Verify { path },
        } => {
            let bad = manifest::verify_manifest(&path)?;
            if bad.is_empty() {
                println!("all artifacts match");
                Ok(TerminationStatus::Completed)
            } else {
                anyhow::bail!("artifacts missing or modified: {}", bad.join(", "))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(status) => exit_code(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
