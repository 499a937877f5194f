//! Worst-case step-up FDR over Dirac-uniform configurations and the
//! calibration of the δ parameter of the a_i = iα/(n+1−iδ) family.
//!
//! Under basic independence the worst-case FDR of the step-up test is
//! attained by a Dirac-uniform configuration, so it equals the maximum of
//! the exact DU FDR over n1 ∈ {0, …, n−1}. The worst case is nondecreasing
//! in δ, which makes bisection sufficient for locating the level-exhausting
//! parameter κ.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{du_shifted_pmf, fdr_from_pmf, StepMode};
use crate::schedule::su_family_a;

/// A solved calibration: the δ at which the worst-case DU step-up FDR
/// equals α within tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub kappa: f64,
    pub worst_case_fdr_at_kappa: f64,
    /// n1 attaining the worst case at κ (smallest index on ties).
    pub argmax_n1: usize,
    pub iterations: usize,
    pub bracket_width: f64,
}

/// Outcome of [`solve_kappa`].
#[derive(Debug, Clone, PartialEq)]
pub enum KappaSolution {
    Converged(CalibrationResult),
    /// The worst-case FDR never crosses α on [0, 1−α): either it already
    /// exceeds α at δ → 0, or it stays below α on the whole interval
    /// (e.g. n = 1, where the worst case is α/(2−δ) < α).
    Infeasible {
        worst_at_lo: f64,
        worst_at_hi: f64,
        detail: String,
    },
    /// The bracket collapsed without meeting the tolerance (a jump of the
    /// exact worst-case curve across α). Not observed at desk scale.
    Bracket {
        lo: f64,
        hi: f64,
        worst_at_lo: f64,
        worst_at_hi: f64,
        iterations: usize,
    },
}

/// Exact worst-case step-up FDR of the a_i(δ) family under basic
/// independence: max over n1 ∈ {0,…,n−1} of the exact DU(n1) FDR.
/// Returns the maximum and its (smallest) argmax.
pub fn worst_case_fdr_su(n: usize, alpha: f64, delta: f64) -> Result<(f64, usize)> {
    let schedule = su_family_a(n, alpha, delta)?;
    let fdrs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|n1| {
            let pmf = du_shifted_pmf(&schedule, n1, StepMode::StepUp)
                .expect("valid shifted thresholds");
            fdr_from_pmf(&pmf, n1)
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (n1, &f) in fdrs.iter().enumerate() {
        if f > best {
            best = f;
            arg = n1;
        }
    }
    Ok((best, arg))
}

/// The full worst-case curve n1 ↦ FDR_DU(n1)(n, δ).
pub fn du_fdr_curve(n: usize, alpha: f64, delta: f64) -> Result<Vec<f64>> {
    let schedule = su_family_a(n, alpha, delta)?;
    Ok((0..n)
        .into_par_iter()
        .map(|n1| {
            let pmf = du_shifted_pmf(&schedule, n1, StepMode::StepUp)
                .expect("valid shifted thresholds");
            fdr_from_pmf(&pmf, n1)
        })
        .collect())
}

/// Bisection for κ: the δ with worst-case FDR equal to α within `tol`.
/// Only the monotonicity of the worst case in δ is used.
pub fn solve_kappa(n: usize, alpha: f64, tol: f64) -> Result<KappaSolution> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::config(format!("tol must be > 0, got {tol}")));
    }
    let mut lo = 0.0;
    let mut hi = (1.0 - alpha) * (1.0 - 1e-12);
    let (w_lo, _) = worst_case_fdr_su(n, alpha, lo)?;
    let (w_hi, _) = worst_case_fdr_su(n, alpha, hi)?;
    if w_lo > alpha + tol {
        return Ok(KappaSolution::Infeasible {
            worst_at_lo: w_lo,
            worst_at_hi: w_hi,
            detail: format!("worst case {w_lo:.6} already exceeds alpha at delta -> 0"),
        });
    }
    if w_hi < alpha - tol {
        return Ok(KappaSolution::Infeasible {
            worst_at_lo: w_lo,
            worst_at_hi: w_hi,
            detail: format!(
                "worst case stays below alpha on [0, 1-alpha): {w_hi:.6} at delta = {hi:.6}"
            ),
        });
    }
    // Endpoint already within tolerance.
    for (delta, w) in [(lo, w_lo), (hi, w_hi)] {
        if (w - alpha).abs() <= tol {
            let (_, arg) = worst_case_fdr_su(n, alpha, delta)?;
            return Ok(KappaSolution::Converged(CalibrationResult {
                kappa: delta,
                worst_case_fdr_at_kappa: w,
                argmax_n1: arg,
                iterations: 0,
                bracket_width: hi - lo,
            }));
        }
    }
    let mut w_lo = w_lo;
    let mut w_hi = w_hi;
    for it in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let (w_mid, arg) = worst_case_fdr_su(n, alpha, mid)?;
        if (w_mid - alpha).abs() <= tol {
            return Ok(KappaSolution::Converged(CalibrationResult {
                kappa: mid,
                worst_case_fdr_at_kappa: w_mid,
                argmax_n1: arg,
                iterations: it,
                bracket_width: hi - lo,
            }));
        }
        if w_mid > alpha {
            hi = mid;
            w_hi = w_mid;
        } else {
            lo = mid;
            w_lo = w_mid;
        }
        if (hi - lo).abs() < f64::EPSILON {
            return Ok(KappaSolution::Bracket {
                lo,
                hi,
                worst_at_lo: w_lo,
                worst_at_hi: w_hi,
                iterations: it,
            });
        }
    }
    Ok(KappaSolution::Bracket {
        lo,
        hi,
        worst_at_lo: w_lo,
        worst_at_hi: w_hi,
        iterations: 200,
    })
}

/// The large-n limit of the worst-case step-up FDR when the true-null
/// fraction is capped at c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticLimit {
    /// The solution in (0,1) of g_δ(x) = (1−c) + cx with g_δ(t) = t/(δt+α).
    pub x: f64,
    /// cx/(1−c+cx), strictly below α on the parameter domain.
    pub limit_fdr: f64,
}

/// Solves the fixed-point quadratic cδx² − (1 − δ(1−c) − cα)x + α(1−c) = 0
/// and returns the root in (0,1) together with the limiting FDR. The
/// residual of the fixed-point equation is verified to 1e−10.
pub fn asymptotic_limit(alpha: f64, c: f64, delta: f64) -> Result<AsymptoticLimit> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(c > alpha && c < 1.0) {
        return Err(Error::domain(format!(
            "c must lie in (alpha, 1) = ({alpha}, 1), got {c}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0 - alpha) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1-alpha) = (0, {}), got {delta}",
            1.0 - alpha
        )));
    }
    let s = 1.0 - c * alpha - delta * (1.0 - c);
    let disc = s * s - 4.0 * (1.0 - c) * c * alpha * delta;
    if disc < 0.0 {
        return Err(Error::domain(format!(
            "negative discriminant {disc} for (alpha, c, delta) = ({alpha}, {c}, {delta})"
        )));
    }
    let sq = disc.sqrt();
    let denom = 2.0 * c * delta;
    // Of the two positive roots exactly one lies in (0,1); the "+" root
    // sits above 1 because the parabola is negative at x = 1.
    let candidates = [(s - sq) / denom, (s + sq) / denom];
    let x = match candidates.iter().copied().find(|x| *x > 0.0 && *x < 1.0) {
        Some(x) => x,
        None => {
            return Err(Error::domain(format!(
                "no root in (0,1): candidates {candidates:?}"
            )))
        }
    };
    let residual = x / (delta * x + alpha) - ((1.0 - c) + c * x);
    if residual.abs() > 1e-10 {
        return Err(Error::domain(format!(
            "fixed-point residual {residual:e} exceeds 1e-10"
        )));
    }
    Ok(AsymptoticLimit {
        x,
        limit_fdr: c * x / (1.0 - c + c * x),
    })
}

/// One row of [`convergence_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Exact worst-case FDR at this n (tends upward to α).
    pub worst_case_fdr: f64,
    pub gap_to_alpha: f64,
    /// n0 = ⌈cn⌉ used for the capped-fraction column.
    pub n0: usize,
    /// Exact DU FDR at n0 = ⌈cn⌉ (tends to the closed-form limit).
    pub du_fdr: f64,
    pub gap_to_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub limit: AsymptoticLimit,
    /// Gaps to α decrease along the ladder.
    pub worst_gap_monotone: bool,
    /// Gaps to the limit decrease along the ladder. Expected on ladders
    /// where c·n is integral; rounding n0 = ⌈cn⌉ perturbs the effective
    /// true-null fraction at other n and can break the trend.
    pub du_gap_monotone: bool,
}

/// Exact finite-n probes of both asymptotic statements: the worst case
/// approaching α and the capped-fraction DU FDR approaching the closed
/// form, on an increasing ladder of n.
pub fn convergence_probe(
    n_list: &[usize],
    alpha: f64,
    delta: f64,
    c: f64,
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("n_list must be nonempty and increasing"));
    }
    let limit = asymptotic_limit(alpha, c, delta)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (worst, _) = worst_case_fdr_su(n, alpha, delta)?;
        let n0 = ((c * n as f64).ceil() as usize).clamp(1, n);
        let n1 = n - n0;
        let schedule = su_family_a(n, alpha, delta)?;
        let pmf = du_shifted_pmf(&schedule, n1, StepMode::StepUp)?;
        let du = fdr_from_pmf(&pmf, n1);
        rows.push(ConvergenceRow {
            n,
            worst_case_fdr: worst,
            gap_to_alpha: (alpha - worst).abs(),
            n0,
            du_fdr: du,
            gap_to_limit: (du - limit.limit_fdr).abs(),
        });
    }
    let worst_gap_monotone = rows
        .windows(2)
        .all(|w| w[1].gap_to_alpha <= w[0].gap_to_alpha);
    let du_gap_monotone = rows
        .windows(2)
        .all(|w| w[1].gap_to_limit <= w[0].gap_to_limit);
    Ok(ConvergenceTable {
        rows,
        limit,
        worst_gap_monotone,
        du_gap_monotone,
    })
}
