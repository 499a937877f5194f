use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rand::Rng;

use mtp_core::calibrate::asymptotic_limit;
use mtp_core::exact::{
    du_shifted_pmf, enfr_dm_identity, enfr_uniform_identity, exact_rejection_pmf,
    fdr_decomposition_residual, StepMode,
};
use mtp_core::mc::{self, Estimand, ProcedureKind, ScenarioConfig, ScheduleSpec};
use mtp_core::models::{AlternativeLaw, Model, ScenarioSpec};
use mtp_core::procedure::{
    fdr_estimator, sigma_boundary, step_down_threshold, step_up_threshold,
};
use mtp_core::rng::substream;
use mtp_core::sample::{HypothesisPartition, PValueSample};
use mtp_core::schedule::{benjamini_liu_floor, gbs_beta, improve_first, rejection_curve_schedule, CriticalSchedule};

use crate::csvfmt::f64_cell;
use crate::manifest::{write_manifest, Manifest};

#[derive(Args)]
pub struct CheckArgs {
    /// Replications for the Monte Carlo rows
    #[arg(long, default_value_t = 200_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fault injection: perturb the second GBS critical value by this
    /// amount before the decomposition check (the check must then fail)
    #[arg(long)]
    perturb_beta2: Option<f64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CheckRow {
    identity: &'static str,
    scenario: String,
    lhs: f64,
    rhs: f64,
    metric: f64,
    pass: bool,
}

fn fuzz_sample(rng: &mut impl Rng, alpha_range: (f64, f64)) -> (PValueSample, f64) {
    let n = rng.random_range(1..=50usize);
    let alpha = alpha_range.0 + (alpha_range.1 - alpha_range.0) * rng.random::<f64>();
    let n1 = rng.random_range(0..n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n1 {
        let coin: f64 = rng.random();
        values.push(if coin < 0.3 {
            0.0
        } else {
            0.1 * rng.random::<f64>()
        });
    }
    for _ in 0..n - n1 {
        values.push(rng.random());
    }
    let part = HypothesisPartition::leading_false(n, n1).unwrap();
    (PValueSample::new(values, part).unwrap(), alpha)
}

fn schedule_rows(rows: &mut Vec<CheckRow>) -> Result<()> {
    let (n, alpha) = (50usize, 0.1f64);
    let beta = gbs_beta(n, alpha)?;

    let rc = rejection_curve_schedule(n, alpha, 1.0 - alpha, (n as f64 + 1.0) / n as f64)?;
    let max_diff = beta
        .alphas()
        .iter()
        .zip(rc.alphas())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    rows.push(CheckRow {
        identity: "gbs-equals-rejection-curve",
        scenario: format!("n={n} alpha={alpha} b=(n+1)/n delta=1-alpha"),
        lhs: beta.alphas()[24],
        rhs: rc.alphas()[24],
        metric: max_diff,
        pass: max_diff <= 1e-15,
    });

    let max_inv = beta
        .alphas()
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let g = (n as f64 + 1.0) / n as f64 * b / (b * (1.0 - alpha) + alpha);
            (g - (i + 1) as f64 / n as f64).abs()
        })
        .fold(0.0f64, f64::max);
    rows.push(CheckRow {
        identity: "gbs-inverts-rejection-curve",
        scenario: format!("n={n} alpha={alpha}"),
        lhs: 0.5,
        rhs: 0.5,
        metric: max_inv,
        pass: max_inv <= 1e-12,
    });

    // The su-delta formula at the excluded endpoint delta = 1-alpha is the
    // GBS expression, checked by direct substitution.
    let (n2, a2) = (40usize, 0.2f64);
    let beta2 = gbs_beta(n2, a2)?;
    let max_sub = (1..=n2)
        .map(|i| {
            let from_su = i as f64 * a2 / (n2 as f64 + 1.0 - i as f64 * (1.0 - a2));
            (from_su - beta2.alphas()[i - 1]).abs()
        })
        .fold(0.0f64, f64::max);
    rows.push(CheckRow {
        identity: "su-delta-boundary-is-gbs",
        scenario: format!("n={n2} alpha={a2} delta=1-alpha"),
        lhs: beta2.alphas()[n2 - 1],
        rhs: n2 as f64 * a2 / (1.0 + n2 as f64 * a2),
        metric: max_sub,
        pass: max_sub <= 1e-15,
    });

    let improved = improve_first(&beta, n, alpha)?;
    let floor = benjamini_liu_floor(n, alpha);
    let monotone = improved.alphas().windows(2).all(|w| w[0] <= w[1]);
    rows.push(CheckRow {
        identity: "improved-first-critical-value",
        scenario: format!("n={n} alpha={alpha}"),
        lhs: improved.alphas()[0],
        rhs: floor,
        metric: (improved.alphas()[0] - floor.max(beta.alphas()[0])).abs(),
        pass: improved.alphas()[0] == floor.max(beta.alphas()[0]) && monotone,
    });
    Ok(())
}

fn decomposition_row(
    rows: &mut Vec<CheckRow>,
    seed: u64,
    perturb: Option<f64>,
) -> Result<()> {
    let mut rng = substream(seed, 1);
    let mut worst: f64 = 0.0;
    let samples = 10_000;
    for _ in 0..samples {
        let (sample, alpha) = if perturb.is_some() {
            // Fault injection uses a fixed geometry so the perturbed value
            // stays a valid schedule entry.
            let mut values = vec![rng.random::<f64>(), rng.random(), rng.random()];
            values[0] *= 0.1;
            let part = HypothesisPartition::leading_false(3, 1).unwrap();
            (PValueSample::new(values, part).unwrap(), 0.25)
        } else {
            fuzz_sample(&mut rng, (0.02, 0.5))
        };
        let n = sample.n();
        let base = gbs_beta(n, alpha)?;
        let schedule = match perturb {
            Some(eps) if n >= 2 => {
                let mut alphas = base.alphas().to_vec();
                alphas[1] += eps;
                CriticalSchedule::custom(alphas)?
            }
            _ => base,
        };
        for outcome in [
            step_down_threshold(&sample, &schedule)?,
            step_up_threshold(&sample, &schedule)?,
        ] {
            worst = worst.max(fdr_decomposition_residual(&outcome, n, alpha)?.abs());
        }
    }
    rows.push(CheckRow {
        identity: "fdr-decomposition",
        scenario: format!(
            "{samples} fuzzed samples n<=50{}",
            if perturb.is_some() {
                " (beta_2 perturbed)"
            } else {
                ""
            }
        ),
        lhs: worst,
        rhs: 0.0,
        metric: worst,
        pass: worst <= 1e-12,
    });
    Ok(())
}

fn estimator_rows(rows: &mut Vec<CheckRow>, seed: u64) -> Result<()> {
    let tol = 1e-9;
    let mut rng = substream(seed, 2);
    let mut equiv_violations = 0u64;
    let mut sigma_violations = 0u64;
    let mut mask_violations = 0u64;
    let mut worst_4b: f64 = 0.0;
    let mut dominance_violations = 0u64;
    let samples = 500;
    for _ in 0..samples {
        let (sample, alpha) = fuzz_sample(&mut rng, (0.02, 0.5));
        let n = sample.n();
        let schedule = gbs_beta(n, alpha)?;
        for (idx, &beta_i) in schedule.alphas().iter().enumerate() {
            let i = idx + 1;
            let r = sample.values().iter().filter(|&&p| p <= beta_i).count();
            let est = fdr_estimator(&sample, beta_i)?;
            if (est <= alpha + tol) != (r + 1 >= i) {
                equiv_violations += 1;
            }
            if ((est - alpha).abs() <= tol) != (r + 1 == i) {
                equiv_violations += 1;
            }
        }
        let sigma = sigma_boundary(&sample, &schedule)?;
        let via_est = schedule
            .alphas()
            .iter()
            .copied()
            .find(|&b| fdr_estimator(&sample, b).unwrap() >= alpha - tol)
            .unwrap_or(schedule.alphas()[n - 1]);
        if sigma != via_est {
            sigma_violations += 1;
        }
        let r_sigma = sample.values().iter().filter(|&&p| p <= sigma).count();
        let expected = if r_sigma < n { alpha } else { 0.0 };
        worst_4b = worst_4b.max((fdr_estimator(&sample, sigma)? - expected).abs());
        let sd = step_down_threshold(&sample, &schedule)?;
        let su = step_up_threshold(&sample, &schedule)?;
        let from_sigma: Vec<bool> = sample.values().iter().map(|&p| p <= sigma).collect();
        if sd.rejected != from_sigma {
            mask_violations += 1;
        }
        if su.r < sd.r {
            dominance_violations += 1;
        }
    }
    rows.push(CheckRow {
        identity: "estimator-threshold-equivalences",
        scenario: format!("{samples} fuzzed samples"),
        lhs: equiv_violations as f64,
        rhs: 0.0,
        metric: equiv_violations as f64,
        pass: equiv_violations == 0,
    });
    rows.push(CheckRow {
        identity: "sigma-is-first-estimator-crossing",
        scenario: format!("{samples} fuzzed samples"),
        lhs: sigma_violations as f64,
        rhs: 0.0,
        metric: sigma_violations as f64,
        pass: sigma_violations == 0,
    });
    rows.push(CheckRow {
        identity: "estimator-at-sigma",
        scenario: format!("{samples} fuzzed samples"),
        lhs: worst_4b,
        rhs: 0.0,
        metric: worst_4b,
        pass: worst_4b <= tol,
    });
    rows.push(CheckRow {
        identity: "sd-rejections-match-sigma",
        scenario: format!("{samples} fuzzed samples"),
        lhs: mask_violations as f64,
        rhs: 0.0,
        metric: mask_violations as f64,
        pass: mask_violations == 0,
    });
    rows.push(CheckRow {
        identity: "su-dominates-sd",
        scenario: format!("{samples} fuzzed samples"),
        lhs: dominance_violations as f64,
        rhs: 0.0,
        metric: dominance_violations as f64,
        pass: dominance_violations == 0,
    });
    Ok(())
}

fn enfr_rows(rows: &mut Vec<CheckRow>, reps: u64, seed: u64) -> Result<()> {
    for &(n, n1, alpha) in &[(3usize, 1usize, 0.25f64), (50, 10, 0.1)] {
        let pmf = du_shifted_pmf(&gbs_beta(n, alpha)?, n1, StepMode::StepDown)?;
        let e1 = enfr_dm_identity(n, n1, alpha, pmf.probs()[n - n1]);
        let diff = (pmf.mean() - e1).abs();
        rows.push(CheckRow {
            identity: "enfr-dirac-internal",
            scenario: format!("n={n} n1={n1} alpha={alpha}"),
            lhs: pmf.mean(),
            rhs: e1,
            metric: diff,
            pass: diff <= 1e-10,
        });
    }

    let (n, n1, alpha) = (3usize, 1usize, 0.25f64);
    let pmf = du_shifted_pmf(&gbs_beta(n, alpha)?, n1, StepMode::StepDown)?;
    let e1 = enfr_dm_identity(n, n1, alpha, pmf.probs()[n - n1]);
    let cfg = ScenarioConfig {
        scenario: ScenarioSpec {
            n,
            n0: n - n1,
            n1,
            model: Model::Du,
        },
        procedure: ProcedureKind::StepDown,
        schedule: ScheduleSpec::gbs(alpha),
        reps,
        seed: seed.wrapping_add(3),
        estimands: vec![Estimand::Enfr],
    };
    let est = mc::run(&cfg)?.estimate(Estimand::Enfr).unwrap();
    let z = (est.mean - e1) / est.se;
    rows.push(CheckRow {
        identity: "enfr-dirac-vs-mc",
        scenario: format!("n={n} n1={n1} alpha={alpha} reps={reps}"),
        lhs: est.mean,
        rhs: e1,
        metric: z,
        pass: z.abs() <= 3.0,
    });

    let (n, alpha) = (10usize, 0.1f64);
    let sched = gbs_beta(n, alpha)?;
    let all = exact_rejection_pmf(sched.alphas(), StepMode::StepDown)?;
    let e2 = enfr_uniform_identity(n, n, alpha, all.probs()[n]);
    let cfg = ScenarioConfig {
        scenario: ScenarioSpec {
            n,
            n0: n,
            n1: 0,
            model: Model::BiaUniform {
                alternative: AlternativeLaw::DiracZero,
            },
        },
        procedure: ProcedureKind::StepDown,
        schedule: ScheduleSpec::gbs(alpha),
        reps,
        seed: seed.wrapping_add(4),
        estimands: vec![Estimand::Enfr],
    };
    let est = mc::run(&cfg)?.estimate(Estimand::Enfr).unwrap();
    let z = (est.mean - e2) / est.se;
    rows.push(CheckRow {
        identity: "enfr-uniform-vs-mc",
        scenario: format!("n={n} all-uniform alpha={alpha} reps={reps}"),
        lhs: est.mean,
        rhs: e2,
        metric: z,
        pass: z.abs() <= 3.0,
    });
    Ok(())
}

fn fixed_point_row(rows: &mut Vec<CheckRow>) -> Result<()> {
    let alpha = 0.1;
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for i in 1..=20 {
        let delta = i as f64 / 21.0 * (1.0 - alpha);
        for j in 1..=20 {
            let c = alpha + j as f64 / 21.0 * (1.0 - alpha);
            let lim = asymptotic_limit(alpha, c, delta)?;
            let residual =
                (lim.x / (delta * lim.x + alpha) - ((1.0 - c) + c * lim.x)).abs();
            worst = worst.max(residual);
            all_ok &= lim.x > 0.0 && lim.x < 1.0 && lim.limit_fdr < alpha;
        }
    }
    rows.push(CheckRow {
        identity: "limit-fixed-point",
        scenario: "20x20 grid alpha=0.1".to_string(),
        lhs: worst,
        rhs: 0.0,
        metric: worst,
        pass: worst <= 1e-10 && all_ok,
    });
    Ok(())
}

pub fn run(args: CheckArgs) -> Result<u8> {
    let mut rows = Vec::new();
    schedule_rows(&mut rows)?;
    decomposition_row(&mut rows, args.seed, args.perturb_beta2)?;
    estimator_rows(&mut rows, args.seed)?;
    enfr_rows(&mut rows, args.reps, args.seed)?;
    fixed_point_row(&mut rows)?;

    let mut csv = String::from("identity,scenario,lhs,rhs,residual_or_z,pass\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.identity,
            row.scenario,
            f64_cell(row.lhs),
            f64_cell(row.rhs),
            f64_cell(row.metric),
            row.pass
        ));
    }
    crate::emit(&csv, args.out.as_ref())?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    if failures > 0 {
        eprintln!("check-identities: {failures} of {} checks failed", rows.len());
    }
    if let Some(out) = &args.out {
        let mut argv = vec![
            "check-identities".to_string(),
            "--reps".to_string(),
            args.reps.to_string(),
            "--seed".to_string(),
            args.seed.to_string(),
        ];
        if let Some(eps) = args.perturb_beta2 {
            argv.extend(["--perturb-beta2".to_string(), eps.to_string()]);
        }
        argv.extend(["--out".to_string(), out.display().to_string()]);
        let mut manifest = Manifest::new("check-identities", argv, vec![out.display().to_string()]);
        manifest.seed = Some(args.seed);
        manifest.reps = Some(args.reps);
        write_manifest(out, &manifest)?;
    }
    Ok(if failures > 0 { 2 } else { 0 })
}
