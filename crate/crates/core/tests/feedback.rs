use qcbc_core::cbc::sql_phase_variance;
use qcbc_core::phaselock::{feedback_ensemble, run_feedback, steady_state_sql_ratio};
use qcbc_core::{FeedbackConfig, RngStream};

#[test]
fn slow_drift_steady_state_is_reported_at_or_above_sql() {
    let (beams, n) = (4, 1e4);
    let mut config = FeedbackConfig::new(beams, n);
    config.drift_var = sql_phase_variance(beams, n).unwrap() / 10.0;
    config.intervals = 2000;
    for seed in 0..4 {
        let state = run_feedback(&config, RngStream::new(seed, 0)).unwrap();
        let ratio = steady_state_sql_ratio(&config, &state).unwrap();
        assert!(ratio.is_finite() && ratio >= 1.0, "seed {seed}: ratio {ratio}");
    }
}

#[test]
fn sql_is_a_floor_when_drift_exceeds_it() {
    for beams in [2usize, 4, 8] {
        for n in [100.0, 1e4] {
            let sql = sql_phase_variance(beams, n).unwrap();
            for drift_factor in [1.0, 3.0] {
                for gain in [0.5, 1.0] {
                    let mut config = FeedbackConfig::new(beams, n);
                    config.drift_var = drift_factor * sql;
                    config.gain = gain;
                    config.intervals = 200;
                    let m = feedback_ensemble(&config, 16, RngStream::new(11, beams as u64)).unwrap();
                    assert!(
                        m.mean() >= sql,
                        "N={beams} n={n} drift={drift_factor}xSQL gain={gain}: {} < {sql}",
                        m.mean()
                    );
                }
            }
        }
    }
}

#[test]
fn ensemble_is_reproducible_and_worker_independent() {
    let mut config = FeedbackConfig::new(4, 1000.0);
    config.drift_var = 1e-4;
    let a = feedback_ensemble(&config, 64, RngStream::new(5, 2)).unwrap();
    let b = qcbc_core::engine::with_workers(Some(1), || feedback_ensemble(&config, 64, RngStream::new(5, 2)).unwrap());
    assert_eq!(a, b);
}

#[test]
fn larger_drift_means_larger_steady_state() {
    let mut lo = FeedbackConfig::new(4, 1000.0);
    lo.drift_var = 1e-4;
    lo.intervals = 200;
    let mut hi = lo.clone();
    hi.drift_var = 1e-3;
    let a = feedback_ensemble(&lo, 32, RngStream::new(3, 0)).unwrap();
    let b = feedback_ensemble(&hi, 32, RngStream::new(3, 0)).unwrap();
    assert!(b.mean() > a.mean());
}
