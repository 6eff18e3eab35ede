//! Photon-counting phase sensing and a click-driven locking loop.
//!
//! Two-beam sensing: the destructive port of a balanced beam splitter sees
//! n·(1 − cos Δψ) photons on average, so requiring one detected photon
//! bounds the detectable phase variance by 2/n (1/n per beam once the
//! mismatch is shared between both inputs).
//!
//! The N-beam loop in [`run_feedback`] drives the Fourier error ports. Each
//! correction interval carries `n` photons per beam, split into two windows:
//!
//! 1. a detection window at the current phases;
//! 2. a probe window with a known zero-mean dither ±d added to the beams.
//!
//! A photon count gives only |ψ_l − ⟨ψ⟩|. The count difference between the
//! probe and detection windows is linear in the signed deviation, which
//! resolves the sign. Only channels whose port clicked in the detection
//! window are corrected. If no port clicked, the second window is run
//! without dither, so a perfectly locked array stays dark.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::cbc::{error_signals, sql_phase_variance};
use crate::engine::runner::run_trials;
use crate::error::{Error, Result};
use crate::field::ComplexAmplitude;
use crate::rng::RngStream;
use crate::stats::Moments;

/// Mean photon number in the destructive port, n·(1 − cos Δψ).
pub fn two_beam_click_rate(n: f64, dpsi: f64) -> f64 {
    n * (1.0 - dpsi.cos())
}

/// Small-angle form n·Δψ²/2.
pub fn two_beam_click_rate_parabolic(n: f64, dpsi: f64) -> f64 {
    0.5 * n * dpsi * dpsi
}

/// Smallest phase variance yielding one detected photon: 2/n one-sided,
/// 1/n per beam when symmetrized.
pub fn min_detectable_phase_var(n: f64, symmetrized: bool) -> f64 {
    if symmetrized {
        1.0 / n
    } else {
        2.0 / n
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Photon counts of the destructive port over `trials` detection windows.
pub fn simulate_click_counts(n: f64, dpsi: f64, trials: u64, rng: RngStream) -> Result<Moments> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("n", format!("must be positive, got {n}")));
    }
    if trials < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: trials as usize,
        });
    }
    let mean = two_beam_click_rate(n, dpsi);
    Ok(run_trials(trials, rng, |r, acc: &mut Moments| {
        acc.push(poisson(mean, r) as f64)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub beams: usize,
    /// Photons per beam per correction interval.
    pub photons: f64,
    /// Phase diffusion per beam per interval (rad²).
    pub drift_var: f64,
    /// Fraction of the estimated deviation removed per correction, in (0, 1].
    pub gain: f64,
    pub intervals: usize,
    /// Probe dither amplitude in rad; defaults to √(2/n).
    pub dither: Option<f64>,
    /// Starting phases; empty means all zero.
    pub initial_phases: Vec<f64>,
}

impl FeedbackConfig {
    pub fn new(beams: usize, photons: f64) -> Self {
        Self {
            beams,
            photons,
            drift_var: 0.0,
            gain: 1.0,
            intervals: 50,
            dither: None,
            initial_phases: Vec::new(),
        }
    }

    pub fn dither(&self) -> f64 {
        self.dither.unwrap_or_else(|| (2.0 / self.photons).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        sql_phase_variance(self.beams, self.photons)?;
        if !(self.gain > 0.0 && self.gain <= 1.0) {
            return Err(Error::invalid("gain", format!("must lie in (0, 1], got {}", self.gain)));
        }
        if !(self.drift_var >= 0.0 && self.drift_var.is_finite()) {
            return Err(Error::invalid("drift_var", format!("must be non-negative, got {}", self.drift_var)));
        }
        if !(self.dither() > 0.0 && self.dither().is_finite()) {
            return Err(Error::invalid("dither", "must be positive"));
        }
        if !self.initial_phases.is_empty() && self.initial_phases.len() != self.beams {
            return Err(Error::invalid(
                "initial_phases",
                format!("expected {} phases, got {}", self.beams, self.initial_phases.len()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockRecord {
    /// 1-based interval index.
    pub interval: usize,
    /// Unbiased sample variance of the phases while the interval's light is
    /// combined: after drift, before the correction.
    pub phase_var: f64,
    /// Sample variance after the correction.
    pub residual_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockState {
    pub phases: Vec<f64>,
    pub clicks_total: u64,
    pub history: Vec<LockRecord>,
}

impl LockState {
    /// Mean in-interval phase variance over the second half of the run.
    pub fn steady_state_var(&self) -> f64 {
        let tail = &self.history[self.history.len() / 2..];
        if tail.is_empty() {
            return f64::NAN;
        }
        tail.iter().map(|r| r.phase_var).sum::<f64>() / tail.len() as f64
    }

    /// Residual variance after the last correction.
    pub fn final_var(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.residual_var)
    }
}

fn sample_var(phases: &[f64]) -> f64 {
    Moments::from_slice(phases).variance()
}

fn port_counts(phases: &[f64], photons: f64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let fields: Vec<ComplexAmplitude> = phases.iter().map(|&p| ComplexAmplitude::from_polar(1.0, p)).collect();
    let eps = error_signals(&fields).expect("non-empty");
    eps.epsilon.iter().map(|e| poisson(photons * e.norm_sqr(), rng)).collect()
}

/// Runs the locking loop for `config.intervals` intervals.
pub fn run_feedback(config: &FeedbackConfig, rng: RngStream) -> Result<LockState> {
    config.validate()?;
    Ok(feedback_loop(config, &mut rng.rng()))
}

fn feedback_loop(config: &FeedbackConfig, rng: &mut ChaCha8Rng) -> LockState {
    let n_beams = config.beams;
    let window = 0.5 * config.photons;
    let d = config.dither();
    let drift = Normal::new(0.0, config.drift_var.sqrt()).expect("finite drift");

    let mut phases = if config.initial_phases.is_empty() {
        vec![0.0; n_beams]
    } else {
        config.initial_phases.clone()
    };
    let mut clicks_total = 0;
    let mut history = Vec::with_capacity(config.intervals);

    for interval in 1..=config.intervals {
        if config.drift_var > 0.0 {
            for p in phases.iter_mut() {
                *p += drift.sample(rng);
            }
        }

        let phase_var = sample_var(&phases);
        let detect = port_counts(&phases, window, rng);
        if detect.iter().all(|&c| c == 0) {
            // Nothing to correct: the second window runs undithered.
            clicks_total += port_counts(&phases, window, rng).iter().sum::<u64>();
            history.push(LockRecord {
                interval,
                phase_var,
                residual_var: phase_var,
            });
            continue;
        }

        // Alternating ±1 pattern, re-centred so the dither moves no
        // photons into the combining port at first order.
        let signs: Vec<f64> = (0..n_beams)
            .map(|k| if (k + interval) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mean_sign = signs.iter().sum::<f64>() / n_beams as f64;
        let offsets: Vec<f64> = signs.iter().map(|s| d * (s - mean_sign)).collect();
        let probed: Vec<f64> = phases.iter().zip(&signs).map(|(p, s)| p + d * s).collect();
        let probe = port_counts(&probed, window, rng);

        clicks_total += detect.iter().sum::<u64>() + probe.iter().sum::<u64>();

        for l in 0..n_beams {
            if detect[l] == 0 {
                continue;
            }
            let u = offsets[l];
            // E[probe − detect]/window = 2·u·δ + u²
            let diff = (probe[l] as f64 - detect[l] as f64) / window;
            let estimate = (diff - u * u) / (2.0 * u);
            phases[l] -= config.gain * estimate;
        }

        history.push(LockRecord {
            interval,
            phase_var,
            residual_var: sample_var(&phases),
        });
    }

    LockState {
        phases,
        clicks_total,
        history,
    }
}

/// Steady-state phase variance relative to the Fourier-scheme SQL.
pub fn steady_state_sql_ratio(config: &FeedbackConfig, state: &LockState) -> Result<f64> {
    Ok(state.steady_state_var() / sql_phase_variance(config.beams, config.photons)?)
}

/// Steady-state phase variance over independent runs, one trial stream each.
pub fn feedback_ensemble(config: &FeedbackConfig, runs: u64, rng: RngStream) -> Result<Moments> {
    config.validate()?;
    Ok(run_trials(runs, rng, |r, acc: &mut Moments| {
        acc.push(feedback_loop(config, r).steady_state_var())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn click_rate_hand_values() {
        assert_eq!(two_beam_click_rate(5.0, 0.0), 0.0);
        assert!((two_beam_click_rate(3.0, std::f64::consts::PI) - 6.0).abs() < 1e-15);
        assert!((two_beam_click_rate(8.0, 0.5) - 0.979_339_5).abs() < 1e-6);
    }

    #[test]
    fn parabolic_remainder_bound() {
        for i in 0..200 {
            let psi = -1.0 + i as f64 * 0.01;
            let n = 17.0;
            let err = (two_beam_click_rate(n, psi) - two_beam_click_rate_parabolic(n, psi)).abs();
            assert!(err <= n * psi.powi(4) / 24.0 + 1e-15);
        }
    }

    #[test]
    fn min_detectable() {
        assert_eq!(min_detectable_phase_var(2.0, false), 1.0);
        assert_eq!(min_detectable_phase_var(100.0, true), 0.01);
        for n in [1.0, 3.0, 1e5] {
            assert_eq!(min_detectable_phase_var(n, true), min_detectable_phase_var(n, false) / 2.0);
        }
        // One photon on average at the one-sided limit, small-angle form.
        let n = 1e4;
        let v = min_detectable_phase_var(n, false);
        assert!((two_beam_click_rate_parabolic(n, v.sqrt()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_counts_match_rate() {
        let m = simulate_click_counts(8.0, 0.5, 200_000, RngStream::new(3, 0)).unwrap();
        let rate = two_beam_click_rate(8.0, 0.5);
        assert!((m.mean() - rate).abs() < 5.0 * m.se_mean());
        assert!((m.variance() - rate).abs() < 5.0 * m.se_variance());
    }

    #[test]
    fn locked_array_stays_locked() {
        let mut cfg = FeedbackConfig::new(5, 1e4);
        cfg.initial_phases = vec![0.2; 5];
        let state = run_feedback(&cfg, RngStream::new(1, 0)).unwrap();
        assert_eq!(state.clicks_total, 0);
        assert!(state.history.iter().all(|r| r.phase_var == 0.0 && r.residual_var == 0.0));
    }

    #[test]
    fn drift_free_two_beam_converges() {
        let mut cfg = FeedbackConfig::new(2, 1e4);
        cfg.initial_phases = vec![0.1, 0.0];
        cfg.intervals = 30;
        let sql = sql_phase_variance(2, 1e4).unwrap();
        let state = run_feedback(&cfg, RngStream::new(2, 0)).unwrap();
        assert!(state.history.iter().any(|r| r.residual_var <= 10.0 * sql));
        assert_eq!(state.history.len(), 30);
        assert!((state.history[0].phase_var - 0.005).abs() < 1e-15);
    }

    #[test]
    fn config_errors() {
        let mut cfg = FeedbackConfig::new(3, 100.0);
        cfg.gain = 0.0;
        assert!(run_feedback(&cfg, RngStream::new(0, 0)).is_err());
        cfg.gain = 1.5;
        assert!(cfg.validate().is_err());
        cfg.gain = 0.5;
        cfg.drift_var = -1.0;
        assert!(cfg.validate().is_err());
        cfg.drift_var = 0.0;
        cfg.initial_phases = vec![0.0; 2];
        assert!(cfg.validate().is_err());
        assert!(FeedbackConfig::new(1, 100.0).validate().is_err());
    }
}
