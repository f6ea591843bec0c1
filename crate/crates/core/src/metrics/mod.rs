//! Measurement: reorder density and entropy, queue utilization statistics,
//! bounce statistics, delay and flow completion time.

mod bounce;
mod reorder;
mod util;

use thiserror::Error;

pub use bounce::{bounce_report, BounceReport, DeliveryRecord, FlowSummary, SwitchCounts};
pub use reorder::{displacement, reorder_density, reorder_entropy, ReorderDistribution};
pub use util::{population_variance, time_ratio, util_variance, SwitchUtil, UtilTrace};

pub(crate) use bounce::ratio;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("displacement threshold must be positive")]
    ZeroThreshold,
}
