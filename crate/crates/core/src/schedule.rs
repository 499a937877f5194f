//! Critical-value families.
//!
//! Every generator returns a [`CriticalSchedule`]: a positive, nondecreasing
//! vector α_1 ≤ … ≤ α_n < 1 tagged with its family and generating
//! parameters. Schedules are materialized eagerly; at desk scale (n up to
//! 10^6) storage is irrelevant and eager vectors keep comparisons exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which generator produced a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFamily {
    /// β_i = iα / (n + 1 − i(1−α)), the GBS step-down values.
    GbsBeta,
    /// α_i = iα / n, the linear Benjamini–Hochberg values.
    LinearBh,
    /// a_i = iα / (n + 1 − iδ), the δ-indexed step-up family.
    SuDelta,
    /// a_i = αi / (nb − iδ), inverse of the rejection curve g(t) = tb/(δt+α).
    RejectionCurve,
    /// max(α_i, 1 − (1−α)^{1/n}): first critical values lifted to the
    /// Benjamini–Liu floor.
    Improved,
    Custom,
}

/// Generating parameters, recorded for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub n: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<f64>,
}

/// A nondecreasing vector of critical values with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSchedule {
    alphas: Vec<f64>,
    family: ScheduleFamily,
    params: ScheduleParams,
}

impl CriticalSchedule {
    fn validated(
        alphas: Vec<f64>,
        family: ScheduleFamily,
        params: ScheduleParams,
    ) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::config("schedule must contain at least one value"));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("critical values must be finite"));
        }
        if alphas[0] <= 0.0 {
            return Err(Error::config("first critical value must be positive"));
        }
        if alphas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config("critical values must be nondecreasing"));
        }
        if *alphas.last().unwrap() >= 1.0 {
            return Err(Error::config("last critical value must be < 1"));
        }
        Ok(CriticalSchedule {
            alphas,
            family,
            params,
        })
    }

    /// Wraps user-supplied values, enforcing 0 < α_1 ≤ … ≤ α_n < 1.
    pub fn custom(alphas: Vec<f64>) -> Result<Self> {
        let params = ScheduleParams {
            n: alphas.len(),
            alpha: f64::NAN,
            delta: None,
            b: None,
        };
        Self::validated(alphas, ScheduleFamily::Custom, params)
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn family(&self) -> ScheduleFamily {
        self.family
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    /// α_r for a 1-based rank r in 1..=n; rank 0 maps to the threshold 0
    /// used to encode "no rejections".
    pub fn value_at_rank(&self, r: usize) -> f64 {
        if r == 0 {
            0.0
        } else {
            self.alphas[r - 1]
        }
    }
}

fn check_n_alpha(n: usize, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::config("n must be >= 1"));
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// β_i = iα / (n + 1 − i(1−α)). Strictly increasing with β_n = nα/(1+nα).
pub fn gbs_beta(n: usize, alpha: f64) -> Result<CriticalSchedule> {
    check_n_alpha(n, alpha)?;
    let nf = n as f64;
    let alphas = (1..=n)
        .map(|i| {
            let i = i as f64;
            i * alpha / (nf + 1.0 - i * (1.0 - alpha))
        })
        .collect();
    CriticalSchedule::validated(
        alphas,
        ScheduleFamily::GbsBeta,
        ScheduleParams {
            n,
            alpha,
            delta: None,
            b: None,
        },
    )
}

/// a_i = iα / (n + 1 − iδ) for 0 ≤ δ < 1−α. At δ = 1−α the same expression
/// reproduces the GBS β values, which is why the right endpoint is excluded
/// here and used only as an identity check.
pub fn su_family_a(n: usize, alpha: f64, delta: f64) -> Result<CriticalSchedule> {
    check_n_alpha(n, alpha)?;
    if !delta.is_finite() || delta < 0.0 || delta >= 1.0 - alpha {
        return Err(Error::config(format!(
            "delta must lie in [0, 1 - alpha) = [0, {}), got {delta}",
            1.0 - alpha
        )));
    }
    let nf = n as f64;
    let alphas = (1..=n)
        .map(|i| {
            let i = i as f64;
            i * alpha / (nf + 1.0 - i * delta)
        })
        .collect();
    CriticalSchedule::validated(
        alphas,
        ScheduleFamily::SuDelta,
        ScheduleParams {
            n,
            alpha,
            delta: Some(delta),
            b: None,
        },
    )
}

/// a_i = g^{-1}(i/n) = αi / (nb − iδ) for the rejection curve
/// g(t) = tb/(δt + α). The condition b > δ + α makes g(1) > 1 and keeps
/// a_n = α/(b−δ) below one.
pub fn rejection_curve_schedule(n: usize, alpha: f64, delta: f64, b: f64) -> Result<CriticalSchedule> {
    check_n_alpha(n, alpha)?;
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::config(format!("delta must be >= 0, got {delta}")));
    }
    if !b.is_finite() || b <= delta + alpha {
        return Err(Error::config(format!(
            "rejection curve requires b > delta + alpha = {}, got b = {b}",
            delta + alpha
        )));
    }
    let nf = n as f64;
    let alphas = (1..=n)
        .map(|i| {
            let i = i as f64;
            alpha * i / (nf * b - i * delta)
        })
        .collect();
    CriticalSchedule::validated(
        alphas,
        ScheduleFamily::RejectionCurve,
        ScheduleParams {
            n,
            alpha,
            delta: Some(delta),
            b: Some(b),
        },
    )
}

/// α_i = iα / n.
pub fn linear_bh(n: usize, alpha: f64) -> Result<CriticalSchedule> {
    check_n_alpha(n, alpha)?;
    let nf = n as f64;
    let alphas = (1..=n).map(|i| i as f64 * alpha / nf).collect();
    CriticalSchedule::validated(
        alphas,
        ScheduleFamily::LinearBh,
        ScheduleParams {
            n,
            alpha,
            delta: None,
            b: None,
        },
    )
}

/// Lifts every critical value to at least 1 − (1−α)^{1/n}, the first
/// critical value of the Benjamini–Liu step-down procedure. Only the
/// leading values can change; monotonicity is preserved.
pub fn improve_first(schedule: &CriticalSchedule, n: usize, alpha: f64) -> Result<CriticalSchedule> {
    check_n_alpha(n, alpha)?;
    if schedule.len() != n {
        return Err(Error::config(format!(
            "schedule length {} does not match n = {n}",
            schedule.len()
        )));
    }
    let floor = 1.0 - (1.0 - alpha).powf(1.0 / n as f64);
    let alphas = schedule.alphas().iter().map(|&a| a.max(floor)).collect();
    CriticalSchedule::validated(
        alphas,
        ScheduleFamily::Improved,
        ScheduleParams {
            n,
            alpha,
            delta: None,
            b: None,
        },
    )
}

/// The Benjamini–Liu floor 1 − (1−α)^{1/n} used by [`improve_first`].
pub fn benjamini_liu_floor(n: usize, alpha: f64) -> f64 {
    1.0 - (1.0 - alpha).powf(1.0 / n as f64)
}
