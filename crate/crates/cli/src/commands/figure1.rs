use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use mtp_core::exact::{du_shifted_pmf, fdr_from_pmf, StepMode};
use mtp_core::mc::{self, Estimand, ProcedureKind, ScenarioConfig, ScheduleSpec};
use mtp_core::models::{Model, ScenarioSpec};
use mtp_core::schedule::ScheduleFamily;

use crate::csvfmt::f64_cell;
use crate::manifest::{write_manifest, Manifest};

/// Dirac-uniform FDR of the step-up, step-down and improved-first-value
/// step-down tests over n0 = 1..=n, exactly and by simulation.
#[derive(Args)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Monte Carlo replications per (n0, procedure) point
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Figure1Args) -> Result<u8> {
    let gbs = ScheduleSpec::gbs(args.alpha);
    let improved = ScheduleSpec {
        family: ScheduleFamily::Improved,
        alpha: args.alpha,
        delta: None,
        b: None,
        values: None,
    };
    let gbs_sched = gbs.materialize(args.n)?;
    let improved_sched = improved.materialize(args.n)?;

    let mut csv = String::from(
        "n0,n1,exact_su,exact_sd,exact_sd_improved,mc_su,mc_su_se,mc_sd,mc_sd_se,\
         mc_sd_improved,mc_sd_improved_se\n",
    );
    for n0 in 1..=args.n {
        let n1 = args.n - n0;
        let exact_su = fdr_from_pmf(&du_shifted_pmf(&gbs_sched, n1, StepMode::StepUp)?, n1);
        let exact_sd = fdr_from_pmf(&du_shifted_pmf(&gbs_sched, n1, StepMode::StepDown)?, n1);
        let exact_sd_improved = fdr_from_pmf(
            &du_shifted_pmf(&improved_sched, n1, StepMode::StepDown)?,
            n1,
        );
        // The three Monte Carlo columns share the per-point seed, so their
        // draws are paired replication by replication.
        let point_seed = args.seed.wrapping_add(n0 as u64);
        let base = ScenarioConfig {
            scenario: ScenarioSpec {
                n: args.n,
                n0,
                n1,
                model: Model::Du,
            },
            procedure: ProcedureKind::StepUp,
            schedule: gbs.clone(),
            reps: args.reps,
            seed: point_seed,
            estimands: vec![Estimand::Fdr],
        };
        let mc_su = mc::run(&base)?.estimate(Estimand::Fdr).unwrap();
        let mut sd_cfg = base.clone();
        sd_cfg.procedure = ProcedureKind::StepDown;
        let mc_sd = mc::run(&sd_cfg)?.estimate(Estimand::Fdr).unwrap();
        let mut imp_cfg = sd_cfg.clone();
        imp_cfg.schedule = improved.clone();
        let mc_imp = mc::run(&imp_cfg)?.estimate(Estimand::Fdr).unwrap();

        csv.push_str(&format!(
            "{n0},{n1},{},{},{},{},{},{},{},{},{}\n",
            f64_cell(exact_su),
            f64_cell(exact_sd),
            f64_cell(exact_sd_improved),
            f64_cell(mc_su.mean),
            f64_cell(mc_su.se),
            f64_cell(mc_sd.mean),
            f64_cell(mc_sd.se),
            f64_cell(mc_imp.mean),
            f64_cell(mc_imp.se)
        ));
    }
    crate::emit(&csv, args.out.as_ref())?;
    if let Some(out) = &args.out {
        let argv = vec![
            "figure1".to_string(),
            "--n".to_string(),
            args.n.to_string(),
            "--alpha".to_string(),
            args.alpha.to_string(),
            "--reps".to_string(),
            args.reps.to_string(),
            "--seed".to_string(),
            args.seed.to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ];
        let mut manifest = Manifest::new("figure1", argv, vec![out.display().to_string()]);
        manifest.seed = Some(args.seed);
        manifest.reps = Some(args.reps);
        write_manifest(out, &manifest)?;
    }
    Ok(0)
}
