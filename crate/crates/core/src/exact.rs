//! Exact finite-sample computations for i.i.d. uniform p-values.
//!
//! The central object is the exact law of the rejection count of a
//! step-down or step-up procedure applied to m i.i.d. uniform(0,1)
//! p-values. It is computed by dynamic programming over the counting
//! process N(c_j) = #{p_i <= c_j}, which is Markov in j with increments
//! N(c_{j+1}) − N(c_j) ~ Binomial(m − N(c_j), (c_{j+1}−c_j)/(1−c_j)).
//! The step-down event {R = k} is {N(c_j) >= j for j <= k} and
//! {N(c_{k+1}) < k+1} (vacuous for k = m); the step-up event {R = k} is
//! {N(c_k) >= k} and {N(c_l) < l for l > k}.
//!
//! All probabilities are carried in plain doubles (no log space); at desk
//! scale (m up to a few hundred, thresholds not pressed against 0 or 1)
//! every intermediate is comfortably above the underflow threshold.

use crate::error::{Error, Result};
use crate::procedure::ProcedureOutcome;
use crate::schedule::CriticalSchedule;
use crate::Estimate;

/// Stepwise direction of a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    StepDown,
    StepUp,
}

/// Exact distribution of the rejection count over {0, …, m}.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionPmf {
    probs: Vec<f64>,
    mode: StepMode,
    thresholds: Vec<f64>,
}

impl RejectionPmf {
    /// P(R = k) for k in 0..=m.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mode(&self) -> StepMode {
        self.mode
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// E[R].
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// P(R >= k).
    pub fn prob_at_least(&self, k: usize) -> f64 {
        self.probs.iter().skip(k).sum()
    }
}

/// Writes the Binomial(k, q) pmf for d = 0..=k into `row`.
fn binom_row(k: usize, q: f64, row: &mut Vec<f64>) {
    row.clear();
    if q <= 0.0 {
        row.resize(k + 1, 0.0);
        row[0] = 1.0;
        return;
    }
    let mut p = (1.0 - q).powi(k as i32);
    let ratio = q / (1.0 - q);
    row.push(p);
    for d in 0..k {
        p *= (k - d) as f64 / (d + 1) as f64 * ratio;
        row.push(p);
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::config("at least one threshold is required"));
    }
    if thresholds
        .iter()
        .any(|c| !c.is_finite() || *c <= 0.0 || *c >= 1.0)
    {
        return Err(Error::config("thresholds must lie strictly in (0, 1)"));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("thresholds must be nondecreasing"));
    }
    Ok(())
}

/// Exact law of the rejection count of the SD/SU procedure with the given
/// thresholds applied to m = thresholds.len() i.i.d. uniform(0,1)
/// p-values. O(m³) time, O(m) space.
pub fn exact_rejection_pmf(thresholds: &[f64], mode: StepMode) -> Result<RejectionPmf> {
    check_thresholds(thresholds)?;
    let m = thresholds.len();
    let probs = match mode {
        StepMode::StepDown => sd_pmf(m, thresholds),
        StepMode::StepUp => su_pmf(m, thresholds),
    };
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(RejectionPmf {
        probs,
        mode,
        thresholds: thresholds.to_vec(),
    })
}

fn sd_pmf(m: usize, c: &[f64]) -> Vec<f64> {
    // f[v] = P(N(c_t) = v, N(c_i) >= i for all i <= t), t = current level.
    let mut pmf = vec![0.0; m + 1];
    let mut f = vec![0.0; m + 1];
    let mut g = vec![0.0; m + 1];
    let mut row = Vec::with_capacity(m + 1);
    f[0] = 1.0;
    let mut c_prev = 0.0;
    for t in 0..m {
        let q = (c[t] - c_prev) / (1.0 - c_prev);
        // Paths sitting exactly on the diagonal that draw no new p-value
        // stop with R = t.
        pmf[t] = f[t] * (1.0 - q).powi((m - t) as i32);
        g.iter_mut().for_each(|x| *x = 0.0);
        for v in t..=m {
            if f[v] == 0.0 {
                continue;
            }
            binom_row(m - v, q, &mut row);
            for (d, &b) in row.iter().enumerate() {
                g[v + d] += f[v] * b;
            }
        }
        // Enforce the survival constraint N(c_{t+1}) >= t+1.
        for x in g.iter_mut().take(t + 1) {
            *x = 0.0;
        }
        std::mem::swap(&mut f, &mut g);
        c_prev = c[t];
    }
    pmf[m] = f[m];
    pmf
}

fn su_pmf(m: usize, c: &[f64]) -> Vec<f64> {
    // b_cur[v] = P(N(c_l) < l for all l in j..=m | N(c_j) = v), computed
    // backward in j; pmf[j-1] is harvested while b_cur holds level j.
    let mut pmf = vec![0.0; m + 1];
    let mut b_cur = vec![0.0; m + 1];
    let mut b_next = vec![0.0; m + 1];
    let mut row = Vec::with_capacity(m + 1);
    let mut urow = Vec::with_capacity(m + 1);
    for (v, x) in b_cur.iter_mut().enumerate() {
        *x = if v < m { 1.0 } else { 0.0 };
    }
    pmf[m] = c[m - 1].powi(m as i32);
    for j in (1..=m).rev() {
        let c_lo = if j >= 2 { c[j - 2] } else { 0.0 };
        let q = (c[j - 1] - c_lo) / (1.0 - c_lo);
        // u_{j-1} = P(N(c_{j-1}) = j-1); the level-0 count is empty.
        let k = j - 1;
        let u = if k == 0 {
            1.0
        } else {
            binom_row(m, c[k - 1], &mut urow);
            urow[k]
        };
        binom_row(m - k, q, &mut row);
        let tail: f64 = row
            .iter()
            .enumerate()
            .map(|(d, &b)| b * b_cur[k + d])
            .sum();
        pmf[k] = u * tail;
        if j > 1 {
            b_next.iter_mut().for_each(|x| *x = 0.0);
            for v in 0..j - 1 {
                binom_row(m - v, q, &mut row);
                let s: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(d, &b)| b * b_cur[v + d])
                    .sum();
                b_next[v] = s;
            }
            std::mem::swap(&mut b_cur, &mut b_next);
        }
    }
    pmf
}

/// Law of the number V of rejected true nulls under the Dirac-uniform
/// configuration DU(n1): the n1 zeros occupy ranks 1..n1, so V follows the
/// rejection count of the same procedure on n0 uniforms with the shifted
/// thresholds c_j = α_{n1+j}.
pub fn du_shifted_pmf(
    schedule: &CriticalSchedule,
    n1: usize,
    mode: StepMode,
) -> Result<RejectionPmf> {
    let n = schedule.len();
    if n1 >= n {
        return Err(Error::config(format!(
            "DU requires n1 < n, got n1 = {n1}, n = {n}"
        )));
    }
    exact_rejection_pmf(&schedule.alphas()[n1..], mode)
}

/// FDR = Σ_k pmf(k) · k/(n1+k) with the 0/0 = 0 convention.
pub fn fdr_from_pmf(pmf: &RejectionPmf, n1: usize) -> f64 {
    pmf.probs()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if k + n1 == 0 {
                0.0
            } else {
                p * k as f64 / (n1 + k) as f64
            }
        })
        .sum()
}

/// Exact ENFR of the step-down test under a Dirac-martingale
/// configuration:
/// E1 = α/(1−α) (n1+1) − α/(1−α) (n+1) P(V(τ_SD) = n0).
/// The caller supplies P(V = n0), exactly (independence) or by MC.
pub fn enfr_dm_identity(n: usize, n1: usize, alpha: f64, p_reject_all: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_reject_all));
    alpha / (1.0 - alpha) * ((n1 + 1) as f64 - (n + 1) as f64 * p_reject_all)
}

/// Exact ENFR of the step-down test when all n p-values are i.i.d.
/// uniform: E2 = (n0/n) α/(1−α) (1 − (n+1) P(R(τ_SD) = n)).
pub fn enfr_uniform_identity(n: usize, n0: usize, alpha: f64, p_reject_everything: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_reject_everything));
    n0 as f64 / n as f64 * alpha / (1.0 - alpha)
        * (1.0 - (n + 1) as f64 * p_reject_everything)
}

/// Per-sample residual of the FDR decomposition under the GBS schedule:
/// V/R − [α/(n+1) · V/β_R + (1−α)/(n+1) · V], which is identically zero
/// because 1/β_R = (n+1−R(1−α))/(Rα). Returns 0 for R = 0 by convention.
pub fn fdr_decomposition_residual(
    outcome: &ProcedureOutcome,
    n: usize,
    alpha: f64,
) -> Result<f64> {
    if outcome.rejected.len() != n {
        return Err(Error::config(format!(
            "outcome describes {} hypotheses, expected n = {n}",
            outcome.rejected.len()
        )));
    }
    if outcome.r == 0 {
        return Ok(0.0);
    }
    let v = outcome.v as f64;
    let r = outcome.r as f64;
    let np1 = (n + 1) as f64;
    Ok(v / r - (alpha / np1 * v / outcome.tau + (1.0 - alpha) / np1 * v))
}

/// f(n) = 2α(n+1)²/(n+3): for n0 >= f(n) the step-up ENFR under a Dirac
/// configuration reaches the α/(1−α)(n1+1) bound and its FDR reaches α.
pub fn f_threshold(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    2.0 * alpha * (nf + 1.0) * (nf + 1.0) / (nf + 3.0)
}

/// One side of the sufficient FDR-control conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub bound: f64,
    pub estimate: Estimate,
    /// bound − mean; positive when the estimate sits below the bound.
    pub margin: f64,
    /// margin in standard-error units (+∞ when se = 0).
    pub z: f64,
    /// mean <= bound + 3 se.
    pub satisfied: bool,
}

fn check_condition(bound: f64, estimate: Estimate) -> ConditionCheck {
    let margin = bound - estimate.mean;
    let z = if estimate.se > 0.0 {
        margin / estimate.se
    } else if margin >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    let slack = if estimate.se.is_finite() {
        3.0 * estimate.se
    } else {
        0.0
    };
    ConditionCheck {
        bound,
        estimate,
        margin,
        z,
        satisfied: estimate.mean <= bound + slack,
    }
}

/// The sufficient conditions for FDR control of a GBS-schedule test:
/// E[V/β_R] <= n0 and E[V] <= α(n1+1)/(1−α), each checked with its
/// Monte Carlo uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdrControlReport {
    pub v_over_schedule: ConditionCheck,
    pub enfr: ConditionCheck,
}

pub fn fdr_control_conditions(
    v_over_schedule: Estimate,
    enfr: Estimate,
    n0: usize,
    n1: usize,
    alpha: f64,
) -> FdrControlReport {
    FdrControlReport {
        v_over_schedule: check_condition(n0 as f64, v_over_schedule),
        enfr: check_condition(alpha / (1.0 - alpha) * (n1 + 1) as f64, enfr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::gbs_beta;

    #[test]
    fn single_threshold_is_bernoulli() {
        for mode in [StepMode::StepDown, StepMode::StepUp] {
            let pmf = exact_rejection_pmf(&[0.3], mode).unwrap();
            assert!((pmf.probs()[0] - 0.7).abs() < 1e-15);
            assert!((pmf.probs()[1] - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn two_thresholds_closed_forms() {
        let (c1, c2) = (0.1, 0.3);
        let su = exact_rejection_pmf(&[c1, c2], StepMode::StepUp).unwrap();
        assert!((su.probs()[2] - c2 * c2).abs() < 1e-14);
        assert!((su.probs()[1] - 2.0 * c1 * (1.0 - c2)).abs() < 1e-14);
        assert!((su.probs()[0] - (1.0 - c2 * c2 - 2.0 * c1 * (1.0 - c2))).abs() < 1e-14);
        let sd = exact_rejection_pmf(&[c1, c2], StepMode::StepDown).unwrap();
        assert!((sd.probs()[2] - (2.0 * c1 * c2 - c1 * c1)).abs() < 1e-14);
        assert!((sd.probs()[1] - 2.0 * c1 * (1.0 - c2)).abs() < 1e-14);
        assert!((sd.probs()[0] - (1.0 - c1) * (1.0 - c1)).abs() < 1e-14);
    }

    #[test]
    fn pmf_sums_to_one_and_su_dominates_sd() {
        let sizes: Vec<usize> = (1..=20).chain([30, 50, 75, 100, 150, 200]).collect();
        for &m in &sizes {
            let sched = gbs_beta(m, 0.1).unwrap();
            let sd = exact_rejection_pmf(sched.alphas(), StepMode::StepDown).unwrap();
            let su = exact_rejection_pmf(sched.alphas(), StepMode::StepUp).unwrap();
            assert!((sd.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10, "m={m}");
            assert!((su.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10, "m={m}");
            // τ_SD <= τ_SU: the SU count stochastically dominates.
            let mut cdf_sd = 0.0;
            let mut cdf_su = 0.0;
            for k in 0..=m {
                cdf_sd += sd.probs()[k];
                cdf_su += su.probs()[k];
                assert!(cdf_su <= cdf_sd + 1e-12, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn du_shifted_edges() {
        let sched = gbs_beta(4, 0.2).unwrap();
        // n1 = n−1: a single uniform against α_n.
        let pmf = du_shifted_pmf(&sched, 3, StepMode::StepUp).unwrap();
        let an = sched.alphas()[3];
        assert!((pmf.probs()[1] - an).abs() < 1e-15);
        // n1 = 0 uses the whole schedule.
        let pmf = du_shifted_pmf(&sched, 0, StepMode::StepDown).unwrap();
        assert_eq!(pmf.m(), 4);
        assert!(du_shifted_pmf(&sched, 4, StepMode::StepUp).is_err());
    }

    #[test]
    fn du_small_case_hand_integration() {
        // n=3, n1=1, α=1/4, SD: P(V >= 1) = P(U_{1:2} <= β_2) = 1 − (4/5)² = 9/25.
        let sched = gbs_beta(3, 0.25).unwrap();
        let pmf = du_shifted_pmf(&sched, 1, StepMode::StepDown).unwrap();
        assert!((pmf.prob_at_least(1) - 9.0 / 25.0).abs() < 1e-14);
    }

    #[test]
    fn fdr_from_pmf_conventions() {
        let sched = gbs_beta(3, 0.25).unwrap();
        let pmf = du_shifted_pmf(&sched, 0, StepMode::StepUp).unwrap();
        // n1 = 0: FDR = P(V >= 1).
        assert!((fdr_from_pmf(&pmf, 0) - pmf.prob_at_least(1)).abs() < 1e-15);
        let degenerate = RejectionPmf {
            probs: vec![1.0, 0.0],
            mode: StepMode::StepUp,
            thresholds: vec![0.5],
        };
        assert_eq!(fdr_from_pmf(&degenerate, 0), 0.0);
    }

    #[test]
    fn enfr_identity_boundaries() {
        // p_reject_all = 0 collapses E1 to α(n1+1)/(1−α).
        let e1 = enfr_dm_identity(10, 4, 0.2, 0.0);
        assert!((e1 - 0.2 / 0.8 * 5.0).abs() < 1e-15);
        // n = 1: E2 must equal β_1 = α/(1+α).
        let sched = gbs_beta(1, 0.3).unwrap();
        let pmf = exact_rejection_pmf(sched.alphas(), StepMode::StepDown).unwrap();
        let e2 = enfr_uniform_identity(1, 1, 0.3, pmf.probs()[1]);
        assert!((e2 - 0.3 / 1.3).abs() < 1e-15);
    }

    #[test]
    fn dirac_enfr_identity_internal_consistency() {
        // Under independence the ENFR from the shifted pmf must equal the
        // E1 formula evaluated with P(V = n0) from the same pmf.
        for &(n, n1, alpha) in &[(3usize, 1usize, 0.25f64), (50, 10, 0.1)] {
            let sched = gbs_beta(n, alpha).unwrap();
            let pmf = du_shifted_pmf(&sched, n1, StepMode::StepDown).unwrap();
            let e1 = enfr_dm_identity(n, n1, alpha, pmf.probs()[n - n1]);
            assert!(
                (pmf.mean() - e1).abs() < 1e-10,
                "n={n} n1={n1}: {} vs {}",
                pmf.mean(),
                e1
            );
        }
    }

    #[test]
    fn f_threshold_values() {
        let f50 = f_threshold(50, 0.1);
        assert!(f50 > 9.81 && f50 < 9.82);
        assert!((f50 * 10.0).round() / 10.0 == 9.8);
        assert_eq!(f_threshold(7, 0.0), 0.0);
        assert!((f_threshold(1, 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn decomposition_residual_zero_rejections() {
        let out = ProcedureOutcome {
            tau: 0.0,
            tau_index: 0,
            sigma: None,
            rejected: vec![false; 5],
            v: 0,
            s: 0,
            r: 0,
        };
        assert_eq!(fdr_decomposition_residual(&out, 5, 0.1).unwrap(), 0.0);
        assert!(fdr_decomposition_residual(&out, 6, 0.1).is_err());
    }

    #[test]
    fn control_report_degenerate() {
        let rep = fdr_control_conditions(
            Estimate::new(0.0, 0.0),
            Estimate::new(0.0, 0.0),
            40,
            10,
            0.1,
        );
        assert!(rep.v_over_schedule.satisfied);
        assert!(rep.enfr.satisfied);
        assert!((rep.enfr.bound - 0.1 / 0.9 * 11.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_validation() {
        assert!(exact_rejection_pmf(&[], StepMode::StepDown).is_err());
        assert!(exact_rejection_pmf(&[0.0, 0.1], StepMode::StepDown).is_err());
        assert!(exact_rejection_pmf(&[0.5, 0.4], StepMode::StepDown).is_err());
        assert!(exact_rejection_pmf(&[0.5, 1.0], StepMode::StepDown).is_err());
        // Ties are allowed.
        assert!(exact_rejection_pmf(&[0.2, 0.2, 0.4], StepMode::StepUp).is_ok());
    }
}
