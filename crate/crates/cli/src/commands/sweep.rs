use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use mtp_core::mc::{self, SweepAxis};

use crate::csvfmt::f64_cell;
use crate::manifest::{read_manifest, write_manifest, Manifest, SweepInfo};

use super::run::load_config;

#[derive(Args)]
pub struct SweepArgs {
    /// Scenario config file (TOML)
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Replay the config and axis embedded in a manifest
    #[arg(long, conflicts_with_all = ["seed", "reps", "axis", "values"])]
    manifest: Option<PathBuf>,
    /// Axis to vary: n0, n1, alpha, delta or reps
    #[arg(long, required_unless_present = "manifest")]
    axis: Option<String>,
    /// Comma-separated values; integer entries may use lo..hi ranges
    /// (inclusive), e.g. "1..50" or "0.1,0.2,0.4"
    #[arg(long, required_unless_present = "manifest")]
    values: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: i64 = lo.trim().parse().context("range bounds must be integers")?;
            let hi: i64 = hi.trim().parse().context("range bounds must be integers")?;
            if hi < lo {
                bail!("empty range {part}");
            }
            values.extend((lo..=hi).map(|v| v as f64));
        } else {
            values.push(part.parse().with_context(|| format!("bad value '{part}'"))?);
        }
    }
    Ok(values)
}

pub fn run(args: SweepArgs) -> Result<u8> {
    let (config, axis, values, source_argv) = if let Some(mpath) = &args.manifest {
        let manifest = read_manifest(mpath)?;
        let Some(config) = manifest.config else {
            bail!("manifest {} does not embed a scenario config", mpath.display());
        };
        let Some(info) = manifest.sweep else {
            bail!("manifest {} does not describe a sweep", mpath.display());
        };
        let axis: SweepAxis = info.axis.parse()?;
        (
            config,
            axis,
            info.values,
            vec![
                "sweep".to_string(),
                "--manifest".to_string(),
                mpath.display().to_string(),
            ],
        )
    } else {
        let path = args.config.as_ref().expect("clap enforces config|manifest");
        let axis_str = args.axis.as_deref().expect("clap enforces axis");
        let values_str = args.values.as_deref().expect("clap enforces values");
        let config = load_config(path, args.seed, args.reps)?;
        let axis: SweepAxis = axis_str.parse()?;
        (
            config,
            axis,
            parse_values(values_str)?,
            vec![
                "sweep".to_string(),
                "--config".to_string(),
                path.display().to_string(),
                "--axis".to_string(),
                axis_str.to_string(),
                "--values".to_string(),
                values_str.to_string(),
            ],
        )
    };
    let rows = mc::sweep(&config, axis, &values)?;
    let mut csv = String::from("axis,value,estimand,mean,se,reps,seed\n");
    for row in &rows {
        for (estimand, est) in &row.report.estimates {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.axis,
                f64_cell(row.value),
                estimand,
                f64_cell(est.mean),
                f64_cell(est.se),
                row.report.reps,
                row.report.seed
            ));
        }
    }
    crate::emit(&csv, args.out.as_ref())?;
    if let Some(out) = &args.out {
        let mut argv = source_argv;
        argv.extend(["--out".to_string(), out.display().to_string()]);
        let mut manifest = Manifest::new("sweep", argv, vec![out.display().to_string()]);
        manifest.seed = Some(config.seed);
        manifest.reps = Some(config.reps);
        manifest.config = Some(config);
        manifest.sweep = Some(SweepInfo {
            axis: axis.to_string(),
            values,
        });
        write_manifest(out, &manifest)?;
    }
    Ok(0)
}
