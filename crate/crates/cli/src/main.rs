//! `mtp` — stepwise multiple-testing procedures at the command line.
//!
//! Subcommands: `crit` (schedule generators), `run` (one simulation),
//! `sweep` (parameter sweeps), `figure1` (Dirac-uniform FDR curves),
//! `calibrate` (level-exhausting step-up parameter), `check-identities`
//! (identity/bound suite). Exit codes: 0 success, 1 usage or
//! configuration error, 2 identity-check failure.

mod commands;
mod csvfmt;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mtp",
    version,
    about = "Step-down/step-up multiple testing: schedules, exact FDR/ENFR analysis, \
             calibration and reproducible simulation"
)]
struct Cli {
    /// Rayon worker threads (default: all cores). Never affects output bytes.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a critical-value schedule as CSV (columns: i, alpha_i)
    Crit(commands::crit::CritArgs),
    /// Run one simulation from a TOML config (or replay a manifest)
    Run(commands::run::RunArgs),
    /// Run a config once per value of one parameter axis
    Sweep(commands::sweep::SweepArgs),
    /// Exact and Monte Carlo Dirac-uniform FDR curves over n0
    Figure1(commands::figure1::Figure1Args),
    /// Solve for the delta at which the worst-case step-up FDR equals alpha
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Run the identity and bound check suite
    CheckIdentities(commands::check::CheckArgs),
}

/// Output target shared by all subcommands: stdout, or a file paired with
/// a manifest.
pub(crate) fn emit(csv: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: configuring {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Crit(args) => commands::crit::run(args),
        Command::Run(args) => commands::run::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::Figure1(args) => commands::figure1::run(args),
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::CheckIdentities(args) => commands::check::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
