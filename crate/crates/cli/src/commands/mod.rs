pub mod calibrate;
pub mod check;
pub mod crit;
pub mod figure1;
pub mod run;
pub mod sweep;

use clap::ValueEnum;
use mtp_core::mc::ScheduleSpec;
use mtp_core::schedule::ScheduleFamily;

/// Schedule families constructible from flags (custom schedules come from
/// config files).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    GbsBeta,
    LinearBh,
    SuDelta,
    RejectionCurve,
    Improved,
}

impl FamilyArg {
    pub fn to_spec(self, alpha: f64, delta: Option<f64>, b: Option<f64>) -> ScheduleSpec {
        let family = match self {
            FamilyArg::GbsBeta => ScheduleFamily::GbsBeta,
            FamilyArg::LinearBh => ScheduleFamily::LinearBh,
            FamilyArg::SuDelta => ScheduleFamily::SuDelta,
            FamilyArg::RejectionCurve => ScheduleFamily::RejectionCurve,
            FamilyArg::Improved => ScheduleFamily::Improved,
        };
        ScheduleSpec {
            family,
            alpha,
            delta,
            b,
            values: None,
        }
    }

    pub fn flag_name(self) -> &'static str {
        match self {
            FamilyArg::GbsBeta => "gbs-beta",
            FamilyArg::LinearBh => "linear-bh",
            FamilyArg::SuDelta => "su-delta",
            FamilyArg::RejectionCurve => "rejection-curve",
            FamilyArg::Improved => "improved",
        }
    }
}
