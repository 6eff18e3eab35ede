//! Semiclassical Gaussian representation of coherent states.
//!
//! A mode is represented by one Wigner-function sample: the mean complex
//! amplitude plus independent Gaussian noise of variance 1/4 on each
//! quadrature, with x = Re(a) and p = Im(a).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Complex field amplitude; |α|² is the mean photon number.
pub type ComplexAmplitude = Complex64;

/// Quadrature variance of any coherent state (and of vacuum).
pub const VAR_COH: f64 = 0.25;

/// Quadrature access on complex amplitudes.
pub trait Quadratures {
    fn x(&self) -> f64;
    fn p(&self) -> f64;
    fn photon_number(&self) -> f64;

    fn quadratures(&self) -> (f64, f64) {
        (self.x(), self.p())
    }
}

impl Quadratures for ComplexAmplitude {
    fn x(&self) -> f64 {
        self.re
    }

    fn p(&self) -> f64 {
        self.im
    }

    fn photon_number(&self) -> f64 {
        self.norm_sqr()
    }
}

/// `(x, p)` of an amplitude.
pub fn quadratures(a: ComplexAmplitude) -> (f64, f64) {
    a.quadratures()
}

/// One stochastic realization of a field mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub value: ComplexAmplitude,
}

impl FieldSample {
    pub fn new(value: ComplexAmplitude) -> Self {
        Self { value }
    }
}

impl From<ComplexAmplitude> for FieldSample {
    fn from(value: ComplexAmplitude) -> Self {
        Self { value }
    }
}

fn vacuum_normal() -> Normal<f64> {
    Normal::new(0.0, VAR_COH.sqrt()).expect("finite std dev")
}

/// Vacuum quadrature fluctuation δa with Var(δx) = Var(δp) = 1/4.
pub fn vacuum_noise<R: Rng + ?Sized>(rng: &mut R) -> ComplexAmplitude {
    let d = vacuum_normal();
    let x = d.sample(rng);
    let p = d.sample(rng);
    ComplexAmplitude::new(x, p)
}

/// Draws a coherent state about `mean`.
pub fn sample_coherent<R: Rng + ?Sized>(mean: ComplexAmplitude, rng: &mut R) -> FieldSample {
    FieldSample::new(mean + vacuum_noise(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::QuadratureStats;

    fn ensemble(mean: ComplexAmplitude, n: usize, seed: u64) -> QuadratureStats {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut stats = QuadratureStats::new();
        for _ in 0..n {
            stats.push(sample_coherent(mean, &mut rng));
        }
        stats
    }

    #[test]
    fn quadratures_are_real_and_imaginary_parts() {
        assert_eq!(quadratures(ComplexAmplitude::new(1.0, 0.0)), (1.0, 0.0));
        assert_eq!(quadratures(ComplexAmplitude::new(0.0, 2.0)), (0.0, 2.0));
        assert_eq!(quadratures(ComplexAmplitude::new(0.5, -0.5)), (0.5, -0.5));
        assert_eq!(ComplexAmplitude::new(3.0, 4.0).photon_number(), 25.0);
    }

    #[test]
    fn vacuum_has_symmetric_quarter_variance() {
        let s = ensemble(ComplexAmplitude::new(0.0, 0.0), 1_000_000, 1);
        assert!((s.var_x() - VAR_COH).abs() < 3.0 * s.se_var_x());
        assert!((s.var_p() - VAR_COH).abs() < 3.0 * s.se_var_p());
    }

    #[test]
    fn displacement_leaves_noise_unchanged() {
        let s = ensemble(ComplexAmplitude::new(3.0, 0.0), 1_000_000, 2);
        assert!((s.mean_x() - 3.0).abs() < 5.0 * s.x.se_mean());
        assert!(s.mean_p().abs() < 5.0 * s.p.se_mean());
        assert!((s.var_x() - VAR_COH).abs() < 3.0 * s.se_var_x());
        assert!((s.var_p() - VAR_COH).abs() < 3.0 * s.se_var_p());
    }

    #[test]
    fn coherent_state_saturates_uncertainty_product() {
        let s = ensemble(ComplexAmplitude::new(1.0, 1.0), 1_000_000, 3);
        let product = (s.var_x() * s.var_p()).sqrt();
        // δ√(vx·vp) ≈ ½(δvx/vx + δvp/vp)·√(vx·vp)
        let se = 0.5 * product * (s.se_var_x() / s.var_x() + s.se_var_p() / s.var_p());
        assert!((product - 0.25).abs() < 3.0 * se, "{product}");
    }

    #[test]
    fn estimate_about_five() {
        let s = ensemble(ComplexAmplitude::new(5.0, 0.0), 1_000_000, 4);
        assert!((s.var_x() - 0.25).abs() < 5.0 * s.se_var_x());
        assert!((s.var_p() - 0.25).abs() < 5.0 * s.se_var_p());
    }
}
