//! `modal-psd`: simulate scenes, estimate PSD components, separate sources and score results.

mod commands;
mod config;
mod eval;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Overrides, UsageError};
use eval::EvalArgs;

#[derive(Debug, Parser)]
#[command(name = "modal-psd", version, about = "PSD estimation and source separation for spherical microphone arrays")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic scene: array WAV, spectra, ground-truth CSVs and stems
    Simulate {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Estimate source, reverberant and noise PSDs per time-frequency bin
    Estimate {
        /// Array recording (.wav) or spectra (.stft)
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Beamform and post-filter one output per source
    Separate {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Output directory of a previous `estimate` run
        #[arg(long)]
        psd: Option<PathBuf>,
        /// Also write the post-filter gains
        #[arg(long)]
        dump_gains: bool,
    },
    /// Score estimates and separated stems against ground truth
    Eval {
        /// Output directory of `simulate`
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Output directory of `estimate`
        #[arg(long)]
        estimates: Option<PathBuf>,
        /// Output directory of `separate`
        #[arg(long)]
        separated: Option<PathBuf>,
        /// Tabulate transfer-matrix condition numbers against the number of sources
        #[arg(long)]
        condition_sweep: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.overrides.threads {
        if n == 0 {
            return Err(config::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker threads")?;
    }
    let cfg = cli.overrides.resolve()?;
    match &cli.command {
        Command::Simulate { output } => commands::simulate(&cfg, output),
        Command::Estimate { input, output } => commands::estimate(&cfg, input.as_deref(), output),
        Command::Separate { input, output, psd, dump_gains } => {
            commands::separate(&cfg, input.as_deref(), psd.as_deref(), *dump_gains, output)
        }
        Command::Eval { truth, estimates, separated, condition_sweep, output } => eval::eval(
            &cfg,
            &EvalArgs {
                truth: truth.as_deref(),
                estimates: estimates.as_deref(),
                separated: separated.as_deref(),
                condition_sweep: *condition_sweep,
                out: output,
            },
        ),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.downcast_ref::<UsageError>().is_some() || e.downcast_ref::<modal_psd::Error>().is_some_and(|e| e.is_usage())
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
