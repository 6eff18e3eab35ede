//! Streaming moment accumulators with exact pairwise merging.
//!
//! [`Moments`] tracks count, mean and the second to fourth central sums so
//! that two partial results combine exactly (Chan et al. / Pébay update).
//! The fourth moment feeds the standard error of the sample variance, which
//! stays honest for the non-Gaussian statistics produced by phase noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSample, Quadratures};

/// Running central moments of a scalar sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut m = Self::new();
        for &v in values {
            m.push(v);
        }
        m
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    /// Exact combination of two disjoint partial accumulations.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;

        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Moments {
            count: self.count + other.count,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Bessel-corrected sample variance. NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count as f64 - 1.0)).max(0.0)
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Standard error of [`Moments::variance`].
    ///
    /// Uses Var(s²) = (μ₄ − σ⁴ (n−3)/(n−1)) / n with the sample fourth
    /// central moment, which reduces to σ²·√(2/(n−1)) for Gaussian data.
    pub fn se_variance(&self) -> f64 {
        if self.count < 4 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let s2 = self.variance();
        let mu4 = self.m4 / n;
        ((mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }

    /// Population-normalized excess kurtosis.
    pub fn excess_kurtosis(&self) -> f64 {
        if self.m2 == 0.0 {
            return 0.0;
        }
        let n = self.count as f64;
        n * self.m4 / (self.m2 * self.m2) - 3.0
    }
}

/// Joint statistics of the x and p quadratures of an ensemble.
///
/// All variances are absolute, in units where the coherent-state variance
/// is 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub x: Moments,
    pub p: Moments,
}

/// Flat view of [`QuadratureStats`] for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSummary {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub se_var_x: f64,
    pub se_var_p: f64,
    pub trials: u64,
}

impl QuadratureStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sample: FieldSample) {
        let (x, p) = sample.value.quadratures();
        self.x.push(x);
        self.p.push(p);
    }

    pub fn trials(&self) -> u64 {
        self.x.count()
    }

    pub fn mean_x(&self) -> f64 {
        self.x.mean()
    }

    pub fn mean_p(&self) -> f64 {
        self.p.mean()
    }

    pub fn var_x(&self) -> f64 {
        self.x.variance()
    }

    pub fn var_p(&self) -> f64 {
        self.p.variance()
    }

    pub fn se_var_x(&self) -> f64 {
        self.x.se_variance()
    }

    pub fn se_var_p(&self) -> f64 {
        self.p.se_variance()
    }

    pub fn summary(&self) -> QuadratureSummary {
        QuadratureSummary {
            mean_x: self.mean_x(),
            mean_p: self.mean_p(),
            var_x: self.var_x(),
            var_p: self.var_p(),
            se_var_x: self.se_var_x(),
            se_var_p: self.se_var_p(),
            trials: self.trials(),
        }
    }
}

impl Extend<FieldSample> for QuadratureStats {
    fn extend<I: IntoIterator<Item = FieldSample>>(&mut self, iter: I) {
        for s in iter {
            self.push(s);
        }
    }
}

/// Unbiased quadrature statistics of a finished sample set.
pub fn estimate_stats(samples: &[FieldSample]) -> Result<QuadratureStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut stats = QuadratureStats::new();
    stats.extend(samples.iter().copied());
    Ok(stats)
}

/// Pooled statistics of two disjoint ensembles.
pub fn merge_stats(a: &QuadratureStats, b: &QuadratureStats) -> Result<QuadratureStats> {
    if a.trials() == 0 || b.trials() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(QuadratureStats {
        x: a.x.merge(&b.x),
        p: a.p.merge(&b.p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_coherent, ComplexAmplitude};
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn fs(re: f64, im: f64) -> FieldSample {
        FieldSample::new(ComplexAmplitude::new(re, im))
    }

    #[test]
    fn two_point_variance() {
        let s = estimate_stats(&[fs(0.0, 0.0), fs(2.0, 0.0)]).unwrap();
        assert_eq!(s.mean_x(), 1.0);
        assert_eq!(s.var_x(), 2.0);
        assert_eq!(s.var_p(), 0.0);
    }

    #[test]
    fn identical_samples_have_zero_variance() {
        let s = estimate_stats(&[fs(1.5, -0.5); 10]).unwrap();
        assert_eq!(s.var_x(), 0.0);
        assert_eq!(s.var_p(), 0.0);
    }

    #[test]
    fn fewer_than_two_is_an_error() {
        assert!(matches!(
            estimate_stats(&[fs(1.0, 1.0)]),
            Err(Error::InsufficientData { got: 1, .. })
        ));
        assert!(estimate_stats(&[]).is_err());
    }

    #[test]
    fn merge_with_empty_is_an_error() {
        let a = estimate_stats(&[fs(0.0, 0.0), fs(1.0, 1.0)]).unwrap();
        assert_eq!(merge_stats(&a, &QuadratureStats::new()), Err(Error::EmptyInput));
        assert_eq!(merge_stats(&QuadratureStats::new(), &a), Err(Error::EmptyInput));
    }

    #[test]
    fn gaussian_se_matches_closed_form() {
        let mut rng = RngStream::new(11, 0).rng();
        let mut stats = QuadratureStats::new();
        for _ in 0..200_000 {
            stats.push(sample_coherent(ComplexAmplitude::new(0.0, 0.0), &mut rng));
        }
        let closed = stats.var_x() * (2.0 / (stats.trials() as f64 - 1.0)).sqrt();
        assert!((stats.se_var_x() / closed - 1.0).abs() < 0.02);
    }

    #[test]
    fn unbiased_over_batches() {
        // Mean of many small-batch variances converges to the true 1/4.
        let mut rng = RngStream::new(5, 0).rng();
        let mut acc = Moments::new();
        for _ in 0..40_000 {
            let batch: Vec<_> = (0..5)
                .map(|_| sample_coherent(ComplexAmplitude::new(0.0, 0.0), &mut rng))
                .collect();
            acc.push(estimate_stats(&batch).unwrap().var_x());
        }
        assert!((acc.mean() - 0.25).abs() < 5.0 * acc.se_mean(), "{}", acc.mean());
    }

    fn batch_central(values: &[f64]) -> (f64, f64, f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let c = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>();
        (mean, c(2), c(3), c(4))
    }

    proptest! {
        #[test]
        fn split_merge_equals_batch(
            values in prop::collection::vec(-100.0f64..100.0, 4..200),
            cut in 0usize..200,
        ) {
            let cut = cut % values.len();
            let merged = Moments::from_slice(&values[..cut]).merge(&Moments::from_slice(&values[cut..]));
            let (mean, m2, m3, m4) = batch_central(&values);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
            prop_assert_eq!(merged.count(), values.len() as u64);
            prop_assert!(close(merged.mean, mean));
            prop_assert!(close(merged.m2, m2));
            prop_assert!(close(merged.m3, m3));
            prop_assert!(close(merged.m4, m4));
        }

        #[test]
        fn merge_is_symmetric(
            a in prop::collection::vec(-10.0f64..10.0, 2..50),
            b in prop::collection::vec(-10.0f64..10.0, 2..50),
        ) {
            let ma = Moments::from_slice(&a);
            let mb = Moments::from_slice(&b);
            let ab = ma.merge(&mb);
            let ba = mb.merge(&ma);
            prop_assert!((ab.mean() - ba.mean()).abs() <= 1e-12 * (1.0 + ab.mean().abs()));
            prop_assert!((ab.variance() - ba.variance()).abs() <= 1e-12 * (1.0 + ab.variance()));
        }
    }
}
