//! Quantum noise limits of coherent beam combining.
//!
//! Closed-form predictors for Fourier-transform beam combining, phase-lock
//! sensing and linear amplification, each paired with a Monte Carlo
//! experiment built on Gaussian (Wigner) sampling of coherent states.
//!
//! Units: quadratures x = Re(a), p = Im(a); coherent states have
//! Var(x) = Var(p) = [`VAR_COH`] = 1/4.

pub mod amplifier;
pub mod cbc;
pub mod engine;
pub mod error;
pub mod field;
pub mod phaselock;
pub mod rng;
pub mod stats;

pub use amplifier::{AmplifierKind, AmplifierSpec, NoiseBudget};
pub use cbc::{CbcConfig, CbcPrediction, ErrorSignals, PhaseModel, PhaseNoise};
pub use engine::{run_plan, Experiment, ExperimentPlan, ExperimentResult};
pub use error::{Error, Result};
pub use field::{ComplexAmplitude, FieldSample, Quadratures, VAR_COH};
pub use phaselock::{FeedbackConfig, LockState};
pub use rng::RngStream;
pub use stats::{estimate_stats, merge_stats, Moments, QuadratureStats, QuadratureSummary};
