//! Step-down and step-up multiple testing procedures with exact
//! finite-sample analysis and a reproducible Monte Carlo engine.
//!
//! The crate is organized around the pipeline used to study FDR/ENFR
//! behaviour of threshold multiple tests:
//!
//! * [`schedule`] — generators for critical-value families (GBS step-down
//!   values, linear Benjamini–Hochberg, the δ-indexed step-up family,
//!   general rejection-curve schedules, improved first critical value).
//! * [`procedure`] — step-down/step-up threshold mechanics, the σ boundary,
//!   the truncated step-up variant and the plug-in FDR estimator.
//! * [`models`] — random scenario generators (independence, Dirac
//!   configurations, Marshall–Olkin and block dependence, a three-hypothesis
//!   counterexample construction) plus a martingale diagnostic.
//! * [`exact`] — exact rejection-count distributions for i.i.d. uniform
//!   p-values by dynamic programming, exact ENFR identities and bounds.
//! * [`calibrate`] — worst-case step-up FDR over Dirac-uniform
//!   configurations, the κ fixed point and the large-n limit.
//! * [`mc`] — seeded, thread-count-independent Monte Carlo estimation.

pub mod calibrate;
pub mod error;
pub mod exact;
pub mod mc;
pub mod models;
pub mod procedure;
pub mod rng;
pub mod sample;
pub mod schedule;

pub use error::{Error, Result};
pub use procedure::ProcedureOutcome;
pub use sample::{HypothesisPartition, PValueSample};
pub use schedule::CriticalSchedule;

/// A Monte Carlo point estimate with its standard error (sample SD / √reps).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(mean: f64, se: f64) -> Self {
        Estimate { mean, se }
    }
}
