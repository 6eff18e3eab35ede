//! Reproducible experiment driver.
//!
//! An [`ExperimentPlan`] names one experiment, a parameter grid, a trial
//! count and a master seed. [`run_plan`] evaluates each grid point with
//! per-trial streams `(seed, point_index, trial_index)` and compares the
//! measured statistics against the closed-form predictors as z-scores.

mod plan;
mod run;
pub mod runner;

pub use plan::{Experiment, ExperimentPlan, GridPoint, ParamValue, DEFAULT_TOLERANCE_K, DEFAULT_TRIALS};
pub use run::{run_plan, Check, ExperimentResult, PointResult};
pub use runner::{run_trials, with_workers, Accumulate, CHUNK_TRIALS};

use crate::error::{Error, Result};
use crate::stats::QuadratureStats;

/// Pooled statistics of two disjoint ensembles. See [`crate::stats::merge_stats`].
pub fn merge_stats(a: &QuadratureStats, b: &QuadratureStats) -> Result<QuadratureStats> {
    crate::stats::merge_stats(a, b)
}

pub(crate) fn plan_error(msg: impl Into<String>) -> Error {
    Error::Plan(msg.into())
}
