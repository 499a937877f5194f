//! Seeded, reproducible Monte Carlo estimation.
//!
//! Replications are embarrassingly parallel. Each replication r draws from
//! the counter-based substream (seed, r), so the draws are independent of
//! scheduling; partial sums are accumulated over fixed chunks of the
//! replication index range and reduced in chunk order, so the report is
//! bitwise identical for any worker count. Two runs differing only in the
//! procedure share their draws replication by replication, which gives
//! common-random-numbers pairing for free.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Model, ScenarioSampler, ScenarioSpec};
use crate::procedure::{sd_index_sorted, su_index_sorted};
use crate::schedule::{
    gbs_beta, improve_first, linear_bh, rejection_curve_schedule, su_family_a, CriticalSchedule,
    ScheduleFamily,
};
use crate::Estimate;

const CHUNK_SIZE: u64 = 8192;

/// Which threshold procedure a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcedureKind {
    StepDown,
    StepUp,
    /// Step-up with at most k rejections but everything below eta rejected.
    StepUpTruncated { k: usize, eta: f64 },
}

/// Quantities estimated per replication and averaged. Ratio estimands use
/// the 0/0 = 0 convention (V = 0 whenever τ = 0 or R = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimand {
    /// E[V/R].
    Fdr,
    /// E[V].
    Enfr,
    /// E[V/τ].
    VOverTau,
    /// E[V/α_R] with α_R the schedule value at the rejection count.
    VOverScheduleAtR,
    /// E[V/(S+1)].
    VOverSPlusOne,
    /// E[S]/n1.
    Power,
}

impl Estimand {
    pub fn name(&self) -> &'static str {
        match self {
            Estimand::Fdr => "fdr",
            Estimand::Enfr => "enfr",
            Estimand::VOverTau => "v-over-tau",
            Estimand::VOverScheduleAtR => "v-over-schedule-at-r",
            Estimand::VOverSPlusOne => "v-over-s-plus-one",
            Estimand::Power => "power",
        }
    }
}

impl std::fmt::Display for Estimand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Declarative schedule description, materialized once n is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub family: ScheduleFamily,
    #[serde(default)]
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<Vec<f64>>,
}

impl ScheduleSpec {
    pub fn gbs(alpha: f64) -> Self {
        ScheduleSpec {
            family: ScheduleFamily::GbsBeta,
            alpha,
            delta: None,
            b: None,
            values: None,
        }
    }

    pub fn materialize(&self, n: usize) -> Result<CriticalSchedule> {
        match self.family {
            ScheduleFamily::GbsBeta => gbs_beta(n, self.alpha),
            ScheduleFamily::LinearBh => linear_bh(n, self.alpha),
            ScheduleFamily::SuDelta => {
                let delta = self
                    .delta
                    .ok_or_else(|| Error::config("su-delta schedule requires delta"))?;
                su_family_a(n, self.alpha, delta)
            }
            ScheduleFamily::RejectionCurve => {
                let delta = self
                    .delta
                    .ok_or_else(|| Error::config("rejection-curve schedule requires delta"))?;
                let b = self
                    .b
                    .ok_or_else(|| Error::config("rejection-curve schedule requires b"))?;
                rejection_curve_schedule(n, self.alpha, delta, b)
            }
            ScheduleFamily::Improved => improve_first(&gbs_beta(n, self.alpha)?, n, self.alpha),
            ScheduleFamily::Custom => {
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::config("custom schedule requires values"))?;
                if values.len() != n {
                    return Err(Error::config(format!(
                        "custom schedule has {} values, expected n = {n}",
                        values.len()
                    )));
                }
                CriticalSchedule::custom(values)
            }
        }
    }
}

/// A complete experiment description: scenario, procedure, schedule,
/// replication budget, seed and requested estimands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSpec,
    pub procedure: ProcedureKind,
    pub schedule: ScheduleSpec,
    pub reps: u64,
    pub seed: u64,
    pub estimands: Vec<Estimand>,
}

/// Point estimates for one run. `wall_secs` is diagnostic only and never
/// part of reproducible output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub estimates: Vec<(Estimand, Estimate)>,
    pub reps: u64,
    pub seed: u64,
    pub wall_secs: f64,
}

impl SimulationReport {
    pub fn estimate(&self, estimand: Estimand) -> Option<Estimate> {
        self.estimates
            .iter()
            .find(|(e, _)| *e == estimand)
            .map(|(_, est)| *est)
    }
}

/// Counts and threshold from one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepOutcome {
    pub v: usize,
    pub s: usize,
    pub r: usize,
    pub tau: f64,
}

/// Reusable per-worker buffers.
#[derive(Default)]
pub struct RepScratch {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

/// A validated run with pre-built sampler and schedule.
pub struct PreparedRun {
    sampler: ScenarioSampler,
    schedule: CriticalSchedule,
    procedure: ProcedureKind,
    n1: usize,
    seed: u64,
}

impl PreparedRun {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.scenario.validate()?;
        let schedule = config.schedule.materialize(config.scenario.n)?;
        if let ProcedureKind::StepUpTruncated { k, eta } = config.procedure {
            if k == 0 || k > config.scenario.n {
                return Err(Error::config(format!(
                    "truncation cap k = {k} must lie in 1..=n = {}",
                    config.scenario.n
                )));
            }
            if !(eta > 0.0 && eta <= schedule.alphas()[0]) {
                return Err(Error::config(format!(
                    "truncation floor eta = {eta} must lie in (0, alpha_1] = (0, {}]",
                    schedule.alphas()[0]
                )));
            }
        }
        if config.estimands.contains(&Estimand::Power) && config.scenario.n1 == 0 {
            return Err(Error::config("power requires n1 >= 1"));
        }
        Ok(PreparedRun {
            sampler: ScenarioSampler::new(&config.scenario)?,
            schedule,
            procedure: config.procedure,
            n1: config.scenario.n1,
            seed: config.seed,
        })
    }

    pub fn schedule(&self) -> &CriticalSchedule {
        &self.schedule
    }

    /// Runs replication `rep` on its substream and returns the counts.
    pub fn outcome(&self, rep: u64, scratch: &mut RepScratch) -> RepOutcome {
        let mut rng = crate::rng::substream(self.seed, rep);
        self.sampler.sample_into(&mut rng, &mut scratch.values);
        scratch.sorted.clear();
        scratch.sorted.extend_from_slice(&scratch.values);
        scratch.sorted.sort_unstable_by(f64::total_cmp);
        let alphas = self.schedule.alphas();
        let tau = match self.procedure {
            ProcedureKind::StepDown => {
                let k = sd_index_sorted(&scratch.sorted, alphas);
                self.schedule.value_at_rank(k)
            }
            ProcedureKind::StepUp => {
                let k = su_index_sorted(&scratch.sorted, alphas);
                self.schedule.value_at_rank(k)
            }
            ProcedureKind::StepUpTruncated { k, eta } => {
                let r_su = su_index_sorted(&scratch.sorted, alphas);
                let base = if r_su > k {
                    scratch.sorted[k - 1]
                } else {
                    self.schedule.value_at_rank(r_su)
                };
                base.max(eta)
            }
        };
        let s = scratch.values[..self.n1].iter().filter(|&&p| p <= tau).count();
        let v = scratch.values[self.n1..].iter().filter(|&&p| p <= tau).count();
        RepOutcome {
            v,
            s,
            r: v + s,
            tau,
        }
    }
}

fn summand(estimand: Estimand, out: &RepOutcome, schedule: &CriticalSchedule, n1: usize) -> f64 {
    match estimand {
        Estimand::Fdr => {
            if out.r > 0 {
                out.v as f64 / out.r as f64
            } else {
                0.0
            }
        }
        Estimand::Enfr => out.v as f64,
        Estimand::VOverTau => {
            if out.tau > 0.0 {
                out.v as f64 / out.tau
            } else {
                0.0
            }
        }
        Estimand::VOverScheduleAtR => {
            if out.r > 0 {
                out.v as f64 / schedule.alphas()[out.r - 1]
            } else {
                0.0
            }
        }
        Estimand::VOverSPlusOne => out.v as f64 / (out.s + 1) as f64,
        Estimand::Power => out.s as f64 / n1 as f64,
    }
}

/// Runs the experiment. The report is bitwise reproducible for a fixed
/// config, regardless of the rayon pool executing it.
pub fn run(config: &ScenarioConfig) -> Result<SimulationReport> {
    if config.reps == 0 {
        return Err(Error::config("reps must be >= 1"));
    }
    if config.estimands.is_empty() {
        return Err(Error::config("at least one estimand is required"));
    }
    let started = Instant::now();
    let prep = PreparedRun::new(config)?;
    let n_est = config.estimands.len();
    let n_chunks = config.reps.div_ceil(CHUNK_SIZE);

    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK_SIZE;
            let hi = (lo + CHUNK_SIZE).min(config.reps);
            let mut scratch = RepScratch::default();
            let mut sums = vec![0.0; n_est];
            let mut sumsqs = vec![0.0; n_est];
            for rep in lo..hi {
                let out = prep.outcome(rep, &mut scratch);
                for (e, estimand) in config.estimands.iter().enumerate() {
                    let x = summand(*estimand, &out, &prep.schedule, prep.n1);
                    sums[e] += x;
                    sumsqs[e] += x * x;
                }
            }
            (sums, sumsqs)
        })
        .collect();

    let mut sums = vec![0.0; n_est];
    let mut sumsqs = vec![0.0; n_est];
    for (ps, pq) in &partials {
        for e in 0..n_est {
            sums[e] += ps[e];
            sumsqs[e] += pq[e];
        }
    }

    let reps = config.reps as f64;
    let estimates = config
        .estimands
        .iter()
        .enumerate()
        .map(|(e, estimand)| {
            let mean = sums[e] / reps;
            let se = if config.reps > 1 {
                let var = ((sumsqs[e] - reps * mean * mean) / (reps - 1.0)).max(0.0);
                (var / reps).sqrt()
            } else {
                f64::NAN
            };
            (*estimand, Estimate::new(mean, se))
        })
        .collect();

    Ok(SimulationReport {
        estimates,
        reps: config.reps,
        seed: config.seed,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// Parameter axes a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Number of true nulls (n fixed; n1 adjusts).
    N0,
    /// Number of false nulls (n fixed; n0 adjusts).
    N1,
    /// Schedule level α (also the model α for the counterexample model).
    Alpha,
    /// Schedule δ (su-delta and rejection-curve families).
    Delta,
    Reps,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N0 => "n0",
            SweepAxis::N1 => "n1",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Delta => "delta",
            SweepAxis::Reps => "reps",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n0" => Ok(SweepAxis::N0),
            "n1" => Ok(SweepAxis::N1),
            "alpha" => Ok(SweepAxis::Alpha),
            "delta" => Ok(SweepAxis::Delta),
            "reps" => Ok(SweepAxis::Reps),
            other => Err(Error::config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

fn integral(value: f64, what: &str) -> Result<u64> {
    if value.fract() != 0.0 || value < 0.0 || value > u64::MAX as f64 {
        return Err(Error::config(format!(
            "{what} must be a nonnegative integer, got {value}"
        )));
    }
    Ok(value as u64)
}

/// The base config with one axis set to `value`.
pub fn apply_axis(base: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::N0 => {
            let n0 = integral(value, "n0")? as usize;
            if n0 == 0 || n0 > cfg.scenario.n {
                return Err(Error::config(format!(
                    "n0 = {n0} must lie in 1..=n = {}",
                    cfg.scenario.n
                )));
            }
            cfg.scenario.n0 = n0;
            cfg.scenario.n1 = cfg.scenario.n - n0;
        }
        SweepAxis::N1 => {
            let n1 = integral(value, "n1")? as usize;
            if n1 >= cfg.scenario.n {
                return Err(Error::config(format!(
                    "n1 = {n1} must lie in 0..n = {}",
                    cfg.scenario.n
                )));
            }
            cfg.scenario.n1 = n1;
            cfg.scenario.n0 = cfg.scenario.n - n1;
        }
        SweepAxis::Alpha => {
            cfg.schedule.alpha = value;
            if let Model::Example1Counter { alpha } = &mut cfg.scenario.model {
                *alpha = value;
            }
        }
        SweepAxis::Delta => {
            cfg.schedule.delta = Some(value);
        }
        SweepAxis::Reps => {
            cfg.reps = integral(value, "reps")?;
        }
    }
    Ok(cfg)
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub report: SimulationReport,
}

/// Runs the base config once per axis value. Point j runs under seed
/// base.seed + j so points are independent yet the whole sweep is
/// reproducible.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len());
    for (j, &value) in values.iter().enumerate() {
        let mut cfg = apply_axis(base, axis, value)?;
        cfg.seed = base.seed.wrapping_add(j as u64);
        let report = run(&cfg)?;
        rows.push(SweepRow {
            axis,
            value,
            report,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::AlternativeLaw;

    fn du_config(n: usize, n1: usize, alpha: f64, proc: ProcedureKind) -> ScenarioConfig {
        ScenarioConfig {
            scenario: ScenarioSpec {
                n,
                n0: n - n1,
                n1,
                model: Model::Du,
            },
            procedure: proc,
            schedule: ScheduleSpec::gbs(alpha),
            reps: 4000,
            seed: 17,
            estimands: vec![Estimand::Fdr, Estimand::Enfr],
        }
    }

    #[test]
    fn validation_errors() {
        let mut cfg = du_config(5, 2, 0.1, ProcedureKind::StepDown);
        cfg.reps = 0;
        assert!(run(&cfg).is_err());
        let mut cfg = du_config(5, 2, 0.1, ProcedureKind::StepDown);
        cfg.estimands.clear();
        assert!(run(&cfg).is_err());
        // n0 >= 1 is enforced.
        let mut cfg = du_config(5, 2, 0.1, ProcedureKind::StepDown);
        cfg.scenario.n1 = 5;
        cfg.scenario.n0 = 0;
        assert!(run(&cfg).is_err());
        // Truncation parameter domains.
        let cfg = du_config(5, 2, 0.1, ProcedureKind::StepUpTruncated { k: 0, eta: 0.001 });
        assert!(run(&cfg).is_err());
        let cfg = du_config(5, 2, 0.1, ProcedureKind::StepUpTruncated { k: 2, eta: 0.5 });
        assert!(run(&cfg).is_err());
        // Power needs false nulls.
        let mut cfg = du_config(5, 0, 0.1, ProcedureKind::StepDown);
        cfg.estimands = vec![Estimand::Power];
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn du_zeros_always_rejected() {
        // Under DU every false null is 0 <= alpha_1, so V = R − n1.
        let cfg = du_config(6, 3, 0.2, ProcedureKind::StepUp);
        let prep = PreparedRun::new(&cfg).unwrap();
        let mut scratch = RepScratch::default();
        for rep in 0..500 {
            let out = prep.outcome(rep, &mut scratch);
            assert_eq!(out.s, 3);
            assert_eq!(out.v, out.r - 3);
        }
    }

    #[test]
    fn reports_identical_across_thread_counts() {
        let cfg = {
            let mut c = du_config(20, 5, 0.1, ProcedureKind::StepUp);
            c.reps = 20_000;
            c.estimands = vec![
                Estimand::Fdr,
                Estimand::Enfr,
                Estimand::VOverTau,
                Estimand::VOverScheduleAtR,
                Estimand::VOverSPlusOne,
                Estimand::Power,
            ];
            c
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run(&cfg).unwrap());
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run(&cfg).unwrap());
        for ((ea, a), (eb, b)) in single.estimates.iter().zip(&quad.estimates) {
            assert_eq!(ea, eb);
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.se.to_bits(), b.se.to_bits());
        }
    }

    #[test]
    fn su_dominates_sd_on_common_draws() {
        let base = {
            let mut c = du_config(15, 4, 0.1, ProcedureKind::StepDown);
            c.scenario.model = Model::BiaUniform {
                alternative: AlternativeLaw::Uniform { theta: 0.2 },
            };
            c
        };
        let sd = PreparedRun::new(&base).unwrap();
        let mut su_cfg = base.clone();
        su_cfg.procedure = ProcedureKind::StepUp;
        let su = PreparedRun::new(&su_cfg).unwrap();
        let mut scratch = RepScratch::default();
        for rep in 0..2000 {
            let a = sd.outcome(rep, &mut scratch);
            let b = su.outcome(rep, &mut scratch);
            assert!(b.r >= a.r, "rep {rep}: SU {} < SD {}", b.r, a.r);
        }
    }

    #[test]
    fn sweep_seeds_and_values() {
        let cfg = du_config(6, 2, 0.1, ProcedureKind::StepDown);
        let rows = sweep(&cfg, SweepAxis::N0, &[2.0, 4.0]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].report.seed, 17);
        assert_eq!(rows[1].report.seed, 18);
        assert!(sweep(&cfg, SweepAxis::N0, &[]).unwrap().is_empty());
        assert!(sweep(&cfg, SweepAxis::N0, &[0.5]).is_err());
        assert!(sweep(&cfg, SweepAxis::N0, &[7.0]).is_err());
    }

    #[test]
    fn rerun_is_bitwise_identical() {
        let cfg = du_config(12, 3, 0.15, ProcedureKind::StepUp);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        for ((_, x), (_, y)) in a.estimates.iter().zip(&b.estimates) {
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
        }
    }
}
