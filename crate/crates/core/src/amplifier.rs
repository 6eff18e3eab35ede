//! Linear amplification of a single mode.
//!
//! Three models are provided:
//!
//! * quantum-limited phase-insensitive: a_out = g·a_in + √(g²−1)·b†, with
//!   the ancilla b in vacuum. Output variance (2G−1)·Var_coh for a coherent
//!   input, G = g².
//! * measure-and-prepare: heterodyne estimate of a_in (one extra unit of
//!   vacuum), then a coherent state prepared at g times the estimate.
//!   Output variance (2G+1)·Var_coh.
//! * phase-sensitive: gain g on x and 1/g on p.
//!
//! Variances are bookkept in [`NoiseBudget`]s that separate the Heisenberg
//! part of the noise from classical excess noise, which is what makes a
//! chain of quantum-limited stages equivalent to a single stage.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::runner::run_trials;
use crate::error::{Error, Result};
use crate::field::{sample_coherent, vacuum_noise, ComplexAmplitude, FieldSample, VAR_COH};
use crate::rng::RngStream;
use crate::stats::QuadratureStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifierKind {
    QuantumLimited,
    MeasurePrepare,
    PhaseSensitive,
}

impl AmplifierKind {
    pub fn name(self) -> &'static str {
        match self {
            AmplifierKind::QuantumLimited => "quantum_limited",
            AmplifierKind::MeasurePrepare => "measure_prepare",
            AmplifierKind::PhaseSensitive => "phase_sensitive",
        }
    }
}

impl std::str::FromStr for AmplifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum_limited" | "ql" => Ok(AmplifierKind::QuantumLimited),
            "measure_prepare" | "mp" => Ok(AmplifierKind::MeasurePrepare),
            "phase_sensitive" | "ps" => Ok(AmplifierKind::PhaseSensitive),
            other => Err(Error::invalid("kind", format!("unknown amplifier kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSpec {
    /// Intensity gain G = g², stored so that integer gains stay exact.
    intensity_gain: f64,
    pub kind: AmplifierKind,
    /// Classical excess noise of the device. Adds 2·G·n_cl units of Var_coh
    /// per quadrature at the output. Zero at the quantum limit.
    pub n_cl: f64,
}

impl AmplifierSpec {
    /// Spec with amplitude gain `gain` (g).
    pub fn new(gain: f64, kind: AmplifierKind) -> Self {
        Self::from_intensity_gain(gain * gain, kind)
    }

    pub fn quantum_limited(gain: f64) -> Self {
        Self::new(gain, AmplifierKind::QuantumLimited)
    }

    /// Spec with intensity gain `g2` (G).
    pub fn from_intensity_gain(g2: f64, kind: AmplifierKind) -> Self {
        Self {
            intensity_gain: g2,
            kind,
            n_cl: 0.0,
        }
    }

    pub fn with_classical_noise(mut self, n_cl: f64) -> Self {
        self.n_cl = n_cl;
        self
    }

    /// Amplitude gain g.
    pub fn gain(&self) -> f64 {
        self.intensity_gain.sqrt()
    }

    pub fn intensity_gain(&self) -> f64 {
        self.intensity_gain
    }

    pub fn validate(&self) -> Result<()> {
        let g2 = self.intensity_gain;
        if !g2.is_finite() {
            return Err(Error::invalid("gain", "must be finite"));
        }
        match self.kind {
            AmplifierKind::PhaseSensitive if g2 <= 0.0 => {
                return Err(Error::invalid("gain", format!("must be positive, got G = {g2}")))
            }
            AmplifierKind::QuantumLimited | AmplifierKind::MeasurePrepare if g2 < 1.0 => {
                return Err(Error::invalid(
                    "gain",
                    format!("phase-insensitive amplifier needs G >= 1, got {g2}"),
                ))
            }
            _ => {}
        }
        if !(self.n_cl >= 0.0 && self.n_cl.is_finite()) {
            return Err(Error::invalid("n_cl", format!("must be non-negative, got {}", self.n_cl)));
        }
        Ok(())
    }

    fn classical_std(&self) -> f64 {
        (2.0 * self.intensity_gain() * self.n_cl * VAR_COH).sqrt()
    }
}

/// Output of the amplifier map for given input and ancilla samples.
///
/// `ancilla` is a vacuum sample. It enters as its conjugate (b†) for the
/// quantum-limited model and as the heterodyne noise for measure-and-prepare.
/// `prepared` is the vacuum of the state prepared by measure-and-prepare and
/// is ignored otherwise. Classical noise is not included.
pub fn amplify_with_ancilla(
    input: ComplexAmplitude,
    ancilla: ComplexAmplitude,
    prepared: ComplexAmplitude,
    spec: &AmplifierSpec,
) -> ComplexAmplitude {
    let g = spec.gain();
    match spec.kind {
        AmplifierKind::QuantumLimited => g * input + (spec.intensity_gain - 1.0).sqrt() * ancilla.conj(),
        AmplifierKind::MeasurePrepare => g * (input + ancilla) + prepared,
        AmplifierKind::PhaseSensitive => ComplexAmplitude::new(g * input.re, input.im / g),
    }
}

/// Passes one field sample through the amplifier.
pub fn amplify_sample<R: Rng + ?Sized>(
    input: FieldSample,
    spec: &AmplifierSpec,
    rng: &mut R,
) -> Result<FieldSample> {
    spec.validate()?;
    Ok(amplify_unchecked(input, spec, rng))
}

fn amplify_unchecked<R: Rng + ?Sized>(input: FieldSample, spec: &AmplifierSpec, rng: &mut R) -> FieldSample {
    let zero = ComplexAmplitude::new(0.0, 0.0);
    let (ancilla, prepared) = match spec.kind {
        AmplifierKind::QuantumLimited => (vacuum_noise(rng), zero),
        AmplifierKind::MeasurePrepare => (vacuum_noise(rng), vacuum_noise(rng)),
        AmplifierKind::PhaseSensitive => (zero, zero),
    };
    let mut out = amplify_with_ancilla(input.value, ancilla, prepared, spec);
    if spec.n_cl > 0.0 {
        let d = Normal::new(0.0, spec.classical_std()).expect("finite std dev");
        out += ComplexAmplitude::new(d.sample(rng), d.sample(rng));
    }
    FieldSample::new(out)
}

/// Per-quadrature variance split into Heisenberg and classical parts, both
/// in multiples of Var_coh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub quantum_units: f64,
    pub classical_units: f64,
}

impl NoiseBudget {
    pub fn new(quantum_units: f64, classical_units: f64) -> Self {
        Self {
            quantum_units,
            classical_units,
        }
    }

    /// A coherent state: one unit of Heisenberg noise, nothing else.
    pub fn pure() -> Self {
        Self::new(1.0, 0.0)
    }

    pub fn total_units(&self) -> f64 {
        self.quantum_units + self.classical_units
    }

    /// Absolute variance.
    pub fn variance(&self) -> f64 {
        self.total_units() * VAR_COH
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quantum_units >= 1.0 && self.quantum_units.is_finite()) {
            return Err(Error::invalid(
                "quantum_units",
                format!("physical states carry at least one unit, got {}", self.quantum_units),
            ));
        }
        if !(self.classical_units >= 0.0 && self.classical_units.is_finite()) {
            return Err(Error::invalid(
                "classical_units",
                format!("must be non-negative, got {}", self.classical_units),
            ));
        }
        Ok(())
    }
}

/// Closed-form output budget of one amplifier stage.
///
/// Phase-insensitive stages keep exactly one unit of Heisenberg noise at
/// the output; the rest (scaled input noise and added noise) is classical
/// from the next stage's point of view. For the phase-sensitive model the
/// budget refers to the amplified quadrature x.
pub fn predict_variance(spec: &AmplifierSpec, input: NoiseBudget) -> Result<NoiseBudget> {
    spec.validate()?;
    input.validate()?;
    let g2 = spec.intensity_gain();
    let extra = 2.0 * g2 * spec.n_cl;
    let scaled = g2 * input.total_units();
    Ok(match spec.kind {
        AmplifierKind::QuantumLimited => {
            NoiseBudget::new(1.0, scaled + (g2 - 1.0) - 1.0 + extra)
        }
        AmplifierKind::MeasurePrepare => NoiseBudget::new(1.0, scaled + g2 + extra),
        AmplifierKind::PhaseSensitive => NoiseBudget::new(
            g2 * input.quantum_units,
            g2 * input.classical_units + extra,
        ),
    })
}

/// Folds [`predict_variance`] over a chain of stages with no inter-stage loss.
pub fn cascade(specs: &[AmplifierSpec], input: NoiseBudget) -> Result<NoiseBudget> {
    input.validate()?;
    specs.iter().try_fold(input, |b, s| predict_variance(s, b))
}

/// `stages` equal quantum-limited stages with total intensity gain `total_gain`.
pub fn split_gain(total_gain: f64, stages: usize) -> Vec<AmplifierSpec> {
    let g2 = total_gain.powf(1.0 / stages as f64);
    vec![AmplifierSpec::from_intensity_gain(g2, AmplifierKind::QuantumLimited); stages]
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

/// Monte Carlo of a coherent input with mean `mean` through a chain of stages.
pub fn simulate_chain(
    specs: &[AmplifierSpec],
    mean: ComplexAmplitude,
    trials: u64,
    rng: RngStream,
) -> Result<QuadratureStats> {
    for s in specs {
        s.validate()?;
    }
    check_trials(trials)?;
    Ok(run_trials(trials, rng, |r, acc: &mut QuadratureStats| {
        let mut s = sample_coherent(mean, r);
        for spec in specs {
            s = amplify_unchecked(s, spec, r);
        }
        acc.push(s)
    }))
}

/// Monte Carlo of a zero-mean input carrying `input_var` per quadrature
/// (Var_coh of quantum noise plus classical excess) through one stage.
pub fn amplify_classical_input(
    spec: &AmplifierSpec,
    input_var: f64,
    trials: u64,
    rng: RngStream,
) -> Result<QuadratureStats> {
    spec.validate()?;
    if !(input_var >= VAR_COH && input_var.is_finite()) {
        return Err(Error::Unphysical(format!(
            "input variance {input_var} is below the coherent-state variance {VAR_COH}"
        )));
    }
    check_trials(trials)?;
    let classical = Normal::new(0.0, (input_var - VAR_COH).sqrt()).expect("finite std dev");
    Ok(run_trials(trials, rng, |r, acc: &mut QuadratureStats| {
        let excess = ComplexAmplitude::new(classical.sample(r), classical.sample(r));
        let input = sample_coherent(excess, r);
        acc.push(amplify_unchecked(input, spec, r))
    }))
}

/// Noise-figure estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFigure {
    pub value: f64,
    pub se: f64,
}

/// SNR_in/SNR_out = Var_out/(G·Var_in), averaged over both quadratures.
pub fn measured_noise_figure(stats: &QuadratureStats, spec: &AmplifierSpec, input_var: f64) -> NoiseFigure {
    let norm = 2.0 * spec.intensity_gain() * input_var;
    NoiseFigure {
        value: (stats.var_x() + stats.var_p()) / norm,
        se: stats.se_var_x().hypot(stats.se_var_p()) / norm,
    }
}

/// Closed-form noise figure for an input of `input_var` per quadrature.
pub fn predicted_noise_figure(spec: &AmplifierSpec, input_var: f64) -> Result<f64> {
    let units = input_var / VAR_COH;
    let out = predict_variance(spec, NoiseBudget::new(1.0, units - 1.0))?;
    Ok(out.total_units() / (spec.intensity_gain() * units))
}
