use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use mtp_core::mc::{self, Estimand, ProcedureKind, ScenarioConfig, ScheduleSpec, SimulationReport};
use mtp_core::models::ScenarioSpec;

use crate::csvfmt::f64_cell;
use crate::manifest::{read_manifest, write_manifest, Manifest};

#[derive(Args)]
pub struct RunArgs {
    /// Scenario config file (TOML)
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Replay the resolved config embedded in a manifest
    #[arg(long, conflicts_with_all = ["seed", "reps"])]
    manifest: Option<PathBuf>,
    /// Overrides the config file seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config file replication count
    #[arg(long)]
    reps: Option<u64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// On-disk scenario config: seed and reps may be left to the CLI.
#[derive(Deserialize)]
pub struct RunFile {
    pub scenario: ScenarioSpec,
    pub procedure: ProcedureKind,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub reps: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub estimands: Vec<Estimand>,
}

pub const DEFAULT_REPS: u64 = 100_000;

pub fn load_config(
    path: &Path,
    seed_flag: Option<u64>,
    reps_flag: Option<u64>,
) -> Result<ScenarioConfig> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: RunFile =
        toml::from_str(&body).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(ScenarioConfig {
        scenario: file.scenario,
        procedure: file.procedure,
        schedule: file.schedule,
        reps: reps_flag.or(file.reps).unwrap_or(DEFAULT_REPS),
        seed: seed_flag.or(file.seed).unwrap_or(0),
        estimands: file.estimands,
    })
}

pub fn report_csv(report: &SimulationReport) -> String {
    let mut csv = String::from("estimand,mean,se,reps,seed\n");
    for (estimand, est) in &report.estimates {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            estimand,
            f64_cell(est.mean),
            f64_cell(est.se),
            report.reps,
            report.seed
        ));
    }
    csv
}

pub fn run(args: RunArgs) -> Result<u8> {
    let (config, source_argv) = if let Some(mpath) = &args.manifest {
        let manifest = read_manifest(mpath)?;
        let Some(config) = manifest.config else {
            bail!(
                "manifest {} does not embed a scenario config",
                mpath.display()
            );
        };
        (config, vec!["run".to_string(), "--manifest".to_string(), mpath.display().to_string()])
    } else {
        let path = args.config.as_ref().expect("clap enforces config|manifest");
        let config = load_config(path, args.seed, args.reps)?;
        (
            config,
            vec![
                "run".to_string(),
                "--config".to_string(),
                path.display().to_string(),
            ],
        )
    };
    let report = mc::run(&config)?;
    eprintln!(
        "run: {} reps, seed {}, {:.2}s",
        report.reps, report.seed, report.wall_secs
    );
    let csv = report_csv(&report);
    crate::emit(&csv, args.out.as_ref())?;
    if let Some(out) = &args.out {
        let mut argv = source_argv;
        argv.extend(["--out".to_string(), out.display().to_string()]);
        let mut manifest = Manifest::new("run", argv, vec![out.display().to_string()]);
        manifest.seed = Some(config.seed);
        manifest.reps = Some(config.reps);
        manifest.config = Some(config);
        write_manifest(out, &manifest)?;
    }
    Ok(0)
}
