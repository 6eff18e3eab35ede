//! Fourier-transform coherent beam combining.
//!
//! N beams of common amplitude √n enter an N-port unitary DFT. Port 0
//! carries the combined beam √N·ᾱ; ports 1..N-1 are fed back through the
//! inverse DFT (with port 0 replaced by vacuum) to produce the error signals
//! ε_l = α_l − ᾱ used for phase locking.
//!
//! The analytic predictors are second order in the phase noise. The Monte
//! Carlo experiment uses exact complex arithmetic unless
//! [`PhaseModel::SecondOrder`] is requested.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::runner::run_trials;
use crate::error::{Error, Result};
use crate::field::{vacuum_noise, ComplexAmplitude, FieldSample, VAR_COH};
use crate::rng::RngStream;
use crate::stats::{Moments, QuadratureStats};

/// Phase variance above which the second-order predictors lose accuracy.
pub const SMALL_ANGLE_LIMIT: f64 = 0.05;

fn twiddles(len: usize, sign: f64) -> Vec<ComplexAmplitude> {
    (0..len)
        .map(|m| ComplexAmplitude::from_polar(1.0, sign * 2.0 * PI * m as f64 / len as f64))
        .collect()
}

fn transform(inputs: &[ComplexAmplitude], sign: f64) -> Result<Vec<ComplexAmplitude>> {
    let len = inputs.len();
    if len == 0 {
        return Err(Error::EmptyInput);
    }
    let w = twiddles(len, sign);
    let scale = 1.0 / (len as f64).sqrt();
    Ok((0..len)
        .map(|k| {
            // Port 0 is a plain sum so it matches combine_port_amplitude bit for bit.
            let sum: ComplexAmplitude = if k == 0 {
                inputs.iter().sum()
            } else {
                inputs.iter().enumerate().map(|(j, a)| a * w[(j * k) % len]).sum()
            };
            sum * scale
        })
        .collect())
}

/// Unitary DFT: β_k = (1/√N) Σ_j α_j e^{−2πi jk/N}.
pub fn dft(inputs: &[ComplexAmplitude]) -> Result<Vec<ComplexAmplitude>> {
    transform(inputs, -1.0)
}

/// Inverse of [`dft`].
pub fn inverse_dft(inputs: &[ComplexAmplitude]) -> Result<Vec<ComplexAmplitude>> {
    transform(inputs, 1.0)
}

/// Amplitude in the combining port, (1/√N) Σ α_j.
pub fn combine_port_amplitude(inputs: &[ComplexAmplitude]) -> Result<ComplexAmplitude> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: ComplexAmplitude = inputs.iter().sum();
    Ok(sum * (1.0 / (inputs.len() as f64).sqrt()))
}

/// Error-port amplitudes of the Fourier locking circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSignals {
    pub epsilon: Vec<ComplexAmplitude>,
}

impl ErrorSignals {
    /// Total mean photon number over all error ports.
    pub fn photon_number(&self) -> f64 {
        self.epsilon.iter().map(|e| e.norm_sqr()).sum()
    }
}

/// Forward DFT, port 0 dropped to vacuum, inverse DFT.
pub fn error_signals(inputs: &[ComplexAmplitude]) -> Result<ErrorSignals> {
    let mut spectrum = dft(inputs)?;
    spectrum[0] = ComplexAmplitude::new(0.0, 0.0);
    Ok(ErrorSignals {
        epsilon: inverse_dft(&spectrum)?,
    })
}

/// Small-angle error photon number n·Σ(ψ_j − ⟨ψ⟩)².
pub fn error_photon_number(phases: &[f64], n: f64) -> Result<f64> {
    if phases.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = phases.iter().sum::<f64>() / phases.len() as f64;
    Ok(n * phases.iter().map(|p| (p - mean).powi(2)).sum::<f64>())
}

/// Phase-locking standard quantum limit, 1/((N−1)·n).
pub fn sql_phase_variance(beams: usize, n: f64) -> Result<f64> {
    if beams < 2 {
        return Err(Error::TooFewBeams(beams));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("n", format!("photon number must be positive, got {n}")));
    }
    Ok(1.0 / ((beams as f64 - 1.0) * n))
}

/// Accuracy factor at which the p-quadrature variance of combining equals
/// that of a quantum-limited amplifier with gain N: (N−1)²/2.
pub fn xi_threshold(beams: usize) -> Result<f64> {
    if beams < 2 {
        return Err(Error::TooFewBeams(beams));
    }
    let m = beams as f64 - 1.0;
    Ok(0.5 * m * m)
}

/// How the per-beam phase jitter is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseNoise {
    /// Var(ψ) in rad².
    Variance(f64),
    /// ξ, with Var(ψ) = ξ·Var_SQL.
    Accuracy(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbcConfig {
    pub beams: usize,
    /// Mean photon number per beam.
    pub photons: f64,
    pub phase: PhaseNoise,
}

impl CbcConfig {
    pub fn with_xi(beams: usize, photons: f64, xi: f64) -> Self {
        Self {
            beams,
            photons,
            phase: PhaseNoise::Accuracy(xi),
        }
    }

    pub fn with_phase_var(beams: usize, photons: f64, phase_var: f64) -> Self {
        Self {
            beams,
            photons,
            phase: PhaseNoise::Variance(phase_var),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sql = sql_phase_variance(self.beams, self.photons)?;
        match self.phase {
            PhaseNoise::Variance(v) if !(v >= 0.0 && v.is_finite()) => Err(Error::invalid(
                "phase_var",
                format!("must be finite and non-negative, got {v}"),
            )),
            PhaseNoise::Accuracy(xi) if !(xi >= 1.0 && xi.is_finite()) => Err(Error::invalid(
                "xi",
                format!("accuracy factor must be >= 1, got {xi}"),
            )),
            _ => {
                debug_assert!(sql > 0.0);
                Ok(())
            }
        }
    }

    /// Var(ψ) in rad².
    pub fn phase_var(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self.phase {
            PhaseNoise::Variance(v) => v,
            PhaseNoise::Accuracy(xi) => xi * sql_phase_variance(self.beams, self.photons)?,
        })
    }

    /// ξ = Var(ψ)/Var_SQL.
    pub fn xi(&self) -> Result<f64> {
        Ok(self.phase_var()? / sql_phase_variance(self.beams, self.photons)?)
    }

    /// False when Var(ψ) exceeds [`SMALL_ANGLE_LIMIT`].
    pub fn small_angle_ok(&self) -> Result<bool> {
        Ok(self.phase_var()? <= SMALL_ANGLE_LIMIT)
    }
}

/// Closed-form output of the combining port (absolute units, Var_coh = 1/4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbcPrediction {
    pub phase_var: f64,
    pub mean_amplitude: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub excess_x: f64,
    pub excess_p: f64,
}

pub fn predict_output(config: &CbcConfig) -> Result<CbcPrediction> {
    let v = config.phase_var()?;
    let n = config.photons;
    let excess_x = 0.5 * n * v * v;
    let excess_p = match config.phase {
        // n·ξ·Var_SQL without the round trip through Var(ψ).
        PhaseNoise::Accuracy(xi) => xi / (config.beams as f64 - 1.0),
        PhaseNoise::Variance(_) => n * v,
    };
    Ok(CbcPrediction {
        phase_var: v,
        mean_amplitude: (config.beams as f64 * n).sqrt() * (1.0 - 0.5 * v),
        var_x: VAR_COH + excess_x,
        var_p: VAR_COH + excess_p,
        excess_x,
        excess_p,
    })
}

/// Phase factor applied to each beam in the Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// e^{iψ}.
    #[default]
    Exact,
    /// 1 + iψ − ψ²/2, the expansion behind the closed-form predictors.
    SecondOrder,
}

impl PhaseModel {
    fn factor(self, psi: f64) -> ComplexAmplitude {
        match self {
            PhaseModel::Exact => ComplexAmplitude::from_polar(1.0, psi),
            PhaseModel::SecondOrder => ComplexAmplitude::new(1.0 - 0.5 * psi * psi, psi),
        }
    }
}

/// One realization of the combining port.
pub fn cbc_trial<R: Rng + ?Sized>(
    beams: usize,
    photons: f64,
    phase: &Normal<f64>,
    model: PhaseModel,
    rng: &mut R,
) -> FieldSample {
    let amp = photons.sqrt();
    let mut sum = ComplexAmplitude::new(0.0, 0.0);
    for _ in 0..beams {
        let psi = phase.sample(rng);
        sum += model.factor(psi) * amp + vacuum_noise(rng);
    }
    FieldSample::new(sum / (beams as f64).sqrt())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: trials as usize,
        });
    }
    Ok(())
}

/// Monte Carlo ensemble of the combining port with exact phase factors.
pub fn simulate_cbc(config: &CbcConfig, trials: u64, rng: RngStream) -> Result<QuadratureStats> {
    simulate_cbc_with(config, trials, rng, PhaseModel::Exact)
}

pub fn simulate_cbc_with(
    config: &CbcConfig,
    trials: u64,
    rng: RngStream,
    model: PhaseModel,
) -> Result<QuadratureStats> {
    let v = config.phase_var()?;
    check_trials(trials)?;
    let phase = Normal::new(0.0, v.sqrt()).map_err(|e| Error::invalid("phase_var", e.to_string()))?;
    let (beams, photons) = (config.beams, config.photons);
    Ok(run_trials(trials, rng, |r, acc: &mut QuadratureStats| {
        acc.push(cbc_trial(beams, photons, &phase, model, r))
    }))
}

/// Ensemble moments of Σ_k ψ_k² for N i.i.d. Gaussian phases.
///
/// The sum is Γ(N/2, 2·Var(ψ)) distributed: mean N·Var(ψ), variance
/// 2N·Var(ψ)².
pub fn gamma_sum_statistics(
    beams: usize,
    phase_var: f64,
    trials: u64,
    rng: RngStream,
) -> Result<Moments> {
    if beams < 1 {
        return Err(Error::EmptyInput);
    }
    if !(phase_var > 0.0 && phase_var.is_finite()) {
        return Err(Error::invalid("phase_var", format!("must be positive, got {phase_var}")));
    }
    check_trials(trials)?;
    let phase = Normal::new(0.0, phase_var.sqrt()).expect("positive variance");
    Ok(run_trials(trials, rng, |r, acc: &mut Moments| {
        let s: f64 = (0..beams).map(|_| phase.sample(r).powi(2)).sum();
        acc.push(s)
    }))
}

/// Ensemble moments of [`error_photon_number`] with phases drawn at `phase_var`.
pub fn error_photon_statistics(
    beams: usize,
    photons: f64,
    phase_var: f64,
    trials: u64,
    rng: RngStream,
) -> Result<Moments> {
    if beams < 1 {
        return Err(Error::EmptyInput);
    }
    check_trials(trials)?;
    let phase = Normal::new(0.0, phase_var.sqrt())
        .map_err(|e| Error::invalid("phase_var", e.to_string()))?;
    Ok(run_trials(trials, rng, |r, acc: &mut Moments| {
        let phases: Vec<f64> = (0..beams).map(|_| phase.sample(r)).collect();
        acc.push(error_photon_number(&phases, photons).expect("non-empty"))
    }))
}
