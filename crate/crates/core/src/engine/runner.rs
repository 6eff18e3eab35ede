//! Deterministic chunked trial execution.
//!
//! Trials are grouped into fixed-size chunks. Each chunk is accumulated
//! sequentially in trial order, chunks run on whatever rayon pool is
//! current, and the partial results are merged in chunk order. The result
//! is therefore a pure function of `(base stream, trials)`.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rng::RngStream;
use crate::stats::{Moments, QuadratureStats};

/// Trials per work unit.
pub const CHUNK_TRIALS: u64 = 4096;

/// Partial result that can absorb a disjoint partial result.
pub trait Accumulate: Default + Send {
    fn absorb(&mut self, other: Self);
}

impl Accumulate for Moments {
    fn absorb(&mut self, other: Self) {
        *self = self.merge(&other);
    }
}

impl Accumulate for QuadratureStats {
    fn absorb(&mut self, other: Self) {
        self.x = self.x.merge(&other.x);
        self.p = self.p.merge(&other.p);
    }
}

impl<A: Accumulate, B: Accumulate> Accumulate for (A, B) {
    fn absorb(&mut self, other: Self) {
        self.0.absorb(other.0);
        self.1.absorb(other.1);
    }
}

/// Runs `trials` trials; trial `t` draws only from `base.trial(t)`.
pub fn run_trials<A, F>(trials: u64, base: RngStream, trial: F) -> A
where
    A: Accumulate,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = A::default();
            let start = c * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(trials);
            for t in start..end {
                let mut rng = base.trial(t).rng();
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = A::default();
    for part in partials {
        total.absorb(part);
    }
    total
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform_moments(trials: u64, workers: usize) -> Moments {
        with_workers(Some(workers), || {
            run_trials(trials, RngStream::new(3, 1), |rng, acc: &mut Moments| {
                acc.push(rng.random::<f64>())
            })
        })
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let one = uniform_moments(50_000, 1);
        let many = uniform_moments(50_000, 8);
        assert_eq!(one, many);
        assert_eq!(one.count(), 50_000);
    }

    #[test]
    fn streaming_equals_batch() {
        let trials = 1_000_000;
        let base = RngStream::new(17, 2);
        let streamed: Moments = run_trials(trials, base, |rng, acc: &mut Moments| {
            acc.push(rng.random::<f64>() * 3.0 - 1.0)
        });
        let values: Vec<f64> = (0..trials)
            .map(|t| base.trial(t).rng().random::<f64>() * 3.0 - 1.0)
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(((streamed.mean() - mean) / mean).abs() < 1e-10);
        assert!(((streamed.variance() - var) / var).abs() < 1e-10);
    }
}
