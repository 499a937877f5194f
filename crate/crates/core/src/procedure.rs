//! Threshold mechanics for step-down and step-up multiple tests.
//!
//! All comparisons between p-values and critical values are exact weak
//! double comparisons (`<=`), no tolerance. When no index qualifies the
//! threshold is reported as index 0 with τ = 0, which makes the 0/0 = 0
//! FDR convention mechanical downstream.

use crate::error::{Error, Result};
use crate::sample::PValueSample;
use crate::schedule::CriticalSchedule;

/// Result of running a threshold procedure on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureOutcome {
    /// The realized critical boundary value; 0 when nothing is rejected.
    pub tau: f64,
    /// Rank of τ in the schedule (0 = no rejection). For the truncated
    /// step-up variant this is the rejection count, since its threshold
    /// is not a schedule value.
    pub tau_index: usize,
    /// The σ boundary min{α_i : p_{i:n} > α_i} ∧ α_n; step-down runs only.
    pub sigma: Option<f64>,
    /// Rejection mask: rejected[i] iff values[i] <= tau.
    pub rejected: Vec<bool>,
    /// Rejected true nulls.
    pub v: usize,
    /// Rejected false nulls.
    pub s: usize,
    /// Total rejections; always v + s.
    pub r: usize,
}

fn check_lengths(sample: &PValueSample, schedule: &CriticalSchedule) -> Result<()> {
    if sample.n() != schedule.len() {
        return Err(Error::config(format!(
            "sample length {} does not match schedule length {}",
            sample.n(),
            schedule.len()
        )));
    }
    Ok(())
}

/// Largest i such that p_{j:n} <= α_j for every j <= i (0 if none).
/// `sorted` must be ascending.
pub fn sd_index_sorted(sorted: &[f64], alphas: &[f64]) -> usize {
    let mut k = 0;
    while k < sorted.len() && sorted[k] <= alphas[k] {
        k += 1;
    }
    k
}

/// Largest i with p_{i:n} <= α_i (0 if none). `sorted` must be ascending.
pub fn su_index_sorted(sorted: &[f64], alphas: &[f64]) -> usize {
    for i in (0..sorted.len()).rev() {
        if sorted[i] <= alphas[i] {
            return i + 1;
        }
    }
    0
}

/// min{α_i : p_{i:n} > α_i} capped at α_n. Because the schedule is
/// nondecreasing this is the critical value at the first crossing.
pub fn sigma_sorted(sorted: &[f64], alphas: &[f64]) -> f64 {
    for i in 0..sorted.len() {
        if sorted[i] > alphas[i] {
            return alphas[i];
        }
    }
    alphas[alphas.len() - 1]
}

fn sorted_values(sample: &PValueSample) -> Vec<f64> {
    let mut v = sample.values().to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn outcome_at_tau(
    sample: &PValueSample,
    tau: f64,
    tau_index: usize,
    sigma: Option<f64>,
) -> ProcedureOutcome {
    let rejected: Vec<bool> = sample.values().iter().map(|&p| p <= tau).collect();
    let (v, s, r) = sample.count_rejections(tau);
    ProcedureOutcome {
        tau,
        tau_index,
        sigma,
        rejected,
        v,
        s,
        r,
    }
}

/// Step-down test: τ = max{α_i : p_{j:n} <= α_j for all j <= i}.
pub fn step_down_threshold(
    sample: &PValueSample,
    schedule: &CriticalSchedule,
) -> Result<ProcedureOutcome> {
    check_lengths(sample, schedule)?;
    let sorted = sorted_values(sample);
    let k = sd_index_sorted(&sorted, schedule.alphas());
    let sigma = sigma_sorted(&sorted, schedule.alphas());
    Ok(outcome_at_tau(
        sample,
        schedule.value_at_rank(k),
        k,
        Some(sigma),
    ))
}

/// Step-up test: τ = max{α_i : p_{i:n} <= α_i}.
pub fn step_up_threshold(
    sample: &PValueSample,
    schedule: &CriticalSchedule,
) -> Result<ProcedureOutcome> {
    check_lengths(sample, schedule)?;
    let sorted = sorted_values(sample);
    let k = su_index_sorted(&sorted, schedule.alphas());
    Ok(outcome_at_tau(sample, schedule.value_at_rank(k), k, None))
}

/// The σ boundary min{α_i : p_{i:n} > α_i} ∧ α_n. Satisfies τ_SD ≤ σ and
/// yields the same step-down rejection set.
pub fn sigma_boundary(sample: &PValueSample, schedule: &CriticalSchedule) -> Result<f64> {
    check_lengths(sample, schedule)?;
    let sorted = sorted_values(sample);
    Ok(sigma_sorted(&sorted, schedule.alphas()))
}

/// Truncated step-up variant: reject at most `k` hypotheses, but always
/// all p-values <= `eta`. Implemented as step-up post-processing: when the
/// step-up count exceeds k the threshold is pulled down to the k-th
/// smallest p-value, then floored at eta. Ties at the cut can exceed the
/// cap; under continuous models that is a null event.
pub fn truncated_step_up(
    sample: &PValueSample,
    schedule: &CriticalSchedule,
    k: usize,
    eta: f64,
) -> Result<ProcedureOutcome> {
    check_lengths(sample, schedule)?;
    if k == 0 || k > schedule.len() {
        return Err(Error::config(format!(
            "truncation cap k = {k} must lie in 1..=n = {}",
            schedule.len()
        )));
    }
    if !(eta > 0.0 && eta <= schedule.alphas()[0]) {
        return Err(Error::config(format!(
            "truncation floor eta = {eta} must lie in (0, alpha_1]"
        )));
    }
    let sorted = sorted_values(sample);
    let r_su = su_index_sorted(&sorted, schedule.alphas());
    let base = if r_su > k {
        sorted[k - 1]
    } else {
        schedule.value_at_rank(r_su)
    };
    let tau = base.max(eta);
    let mut out = outcome_at_tau(sample, tau, 0, None);
    out.tau_index = out.r;
    Ok(out)
}

/// The plug-in FDR estimator α̂(t) = [t/(1−t)] · [1−F̂_n(t)] / [F̂_n(t)+1/n]
/// with F̂_n the empirical distribution function of the sample.
pub fn fdr_estimator(sample: &PValueSample, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::domain(format!(
            "estimator evaluation point must lie in [0, 1), got {t}"
        )));
    }
    let n = sample.n() as f64;
    let fhat = sample.values().iter().filter(|&&p| p <= t).count() as f64 / n;
    Ok(t / (1.0 - t) * (1.0 - fhat) / (fhat + 1.0 / n))
}
