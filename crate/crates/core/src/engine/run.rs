use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::plan::{Experiment, ExperimentPlan, GridPoint, ParamValue};
use super::plan_error;
use super::runner::with_workers;
use crate::amplifier::{
    amplify_classical_input, cascade, measured_noise_figure, predict_variance, predicted_noise_figure,
    simulate_chain, split_gain, AmplifierKind, AmplifierSpec, NoiseBudget,
};
use crate::cbc::{gamma_sum_statistics, predict_output, simulate_cbc, sql_phase_variance, CbcConfig};
use crate::error::Result;
use crate::field::{ComplexAmplitude, VAR_COH};
use crate::phaselock::{run_feedback, simulate_click_counts, two_beam_click_rate, FeedbackConfig};
use crate::rng::{RngStream, TRIAL_BITS};
use crate::stats::{Moments, QuadratureStats, QuadratureSummary};

/// Measured quantity against its closed-form prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub measured: f64,
    pub predicted: f64,
    /// Standard error of `measured`; zero for closed-form checks.
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

/// Relative tolerance for checks with no statistical error.
const EXACT_RTOL: f64 = 1e-12;

impl Check {
    pub fn new(quantity: &str, measured: f64, predicted: f64, se: f64, k: f64) -> Self {
        let diff = measured - predicted;
        let z = if se > 0.0 {
            diff / se
        } else if diff.abs() <= EXACT_RTOL * predicted.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Check {
            quantity: quantity.to_string(),
            measured,
            predicted,
            se,
            z,
            pass: z.abs() <= k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub index: usize,
    pub params: GridPoint,
    pub stats: Option<QuadratureSummary>,
    pub checks: Vec<Check>,
    /// Derived values reported alongside the checks.
    pub notes: BTreeMap<String, f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: Option<String>,
    pub experiment: Experiment,
    pub master_seed: u64,
    pub trials: u64,
    pub tolerance_k: f64,
    pub points: Vec<PointResult>,
    pub pass: bool,
}

/// Executes every grid point of `plan`.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let points = with_workers(plan.workers, || {
        plan.grid
            .iter()
            .enumerate()
            .map(|(i, p)| run_point(plan, i, p))
            .collect::<Result<Vec<_>>>()
    })?;
    let pass = points.iter().all(|p| p.pass);
    Ok(ExperimentResult {
        name: plan.name.clone(),
        experiment: plan.experiment,
        master_seed: plan.master_seed,
        trials: plan.trials,
        tolerance_k: plan.tolerance_k,
        points,
        pass,
    })
}

struct Params<'a>(&'a GridPoint);

impl Params<'_> {
    fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Num(v)) => Ok(Some(*v)),
            Some(ParamValue::Text(s)) => Err(plan_error(format!("`{key}` must be numeric, got `{s}`"))),
        }
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| plan_error(format!("missing parameter `{key}`")))
    }

    fn or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> Result<usize> {
        as_count(self.req(key)?, key)
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.num(key)? {
            Some(v) => as_count(v, key),
            None => Ok(default),
        }
    }

    fn text(&self, key: &str) -> Option<String> {
        self.0.get(key).map(|v| v.to_string())
    }
}

fn as_count(v: f64, key: &str) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(plan_error(format!("`{key}` must be a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

struct Outcome {
    stats: Option<QuadratureStats>,
    checks: Vec<Check>,
    notes: BTreeMap<String, f64>,
}

fn run_point(plan: &ExperimentPlan, index: usize, point: &GridPoint) -> Result<PointResult> {
    let stream = RngStream::new(plan.master_seed, index as u64);
    let p = Params(point);
    let k = plan.tolerance_k;
    let trials = plan.trials;
    let out = match plan.experiment {
        Experiment::Cbc => cbc_point(&p, trials, stream, k)?,
        Experiment::Amp => amp_point(&p, trials, stream, k)?,
        Experiment::Cascade => cascade_point(&p, trials, stream, k)?,
        Experiment::Lock => lock_point(&p, trials, stream, k)?,
        Experiment::Gamma => gamma_point(&p, trials, stream, k)?,
    };
    let pass = out.checks.iter().all(|c| c.pass);
    Ok(PointResult {
        index,
        params: point.clone(),
        stats: out.stats.map(|s| s.summary()),
        checks: out.checks,
        notes: out.notes,
        pass,
    })
}

fn variance_checks(s: &QuadratureStats, var_x: f64, var_p: f64, k: f64) -> Vec<Check> {
    vec![
        Check::new("var_x", s.var_x(), var_x, s.se_var_x(), k),
        Check::new("var_p", s.var_p(), var_p, s.se_var_p(), k),
    ]
}

fn cbc_point(p: &Params, trials: u64, stream: RngStream, k: f64) -> Result<Outcome> {
    let beams = p.count("N")?;
    let n = p.req("n")?;
    let config = match (p.num("xi")?, p.num("phase_var")?) {
        (Some(xi), None) => CbcConfig::with_xi(beams, n, xi),
        (None, Some(v)) => CbcConfig::with_phase_var(beams, n, v),
        _ => return Err(plan_error("cbc needs exactly one of `xi` or `phase_var`")),
    };
    let pred = predict_output(&config)?;
    let s = simulate_cbc(&config, trials, stream)?;
    let mut checks = variance_checks(&s, pred.var_x, pred.var_p, k);
    checks.push(Check::new("mean_amplitude", s.mean_x(), pred.mean_amplitude, s.x.se_mean(), k));
    let notes = BTreeMap::from([
        ("phase_var".to_string(), pred.phase_var),
        ("xi".to_string(), config.xi()?),
        ("small_angle_ok".to_string(), f64::from(u8::from(config.small_angle_ok()?))),
    ]);
    Ok(Outcome {
        stats: Some(s),
        checks,
        notes,
    })
}

fn amp_point(p: &Params, trials: u64, stream: RngStream, k: f64) -> Result<Outcome> {
    let g2 = p.req("G")?;
    let kind: AmplifierKind = match p.text("kind") {
        Some(s) => s.parse()?,
        None => AmplifierKind::QuantumLimited,
    };
    let spec = AmplifierSpec::from_intensity_gain(g2, kind).with_classical_noise(p.or("n_cl", 0.0)?);
    let input_var = p.or("input_var", VAR_COH)?;
    let alpha = p.or("alpha", 1.0)?;

    let units = input_var / VAR_COH;
    let predicted = predict_variance(&spec, NoiseBudget::new(1.0, units - 1.0))?.variance();
    let s = if input_var > VAR_COH {
        amplify_classical_input(&spec, input_var, trials, stream)?
    } else {
        simulate_chain(&[spec], ComplexAmplitude::new(alpha, 0.0), trials, stream)?
    };
    let (var_x, var_p) = match kind {
        AmplifierKind::PhaseSensitive => (predicted, input_var / g2),
        _ => (predicted, predicted),
    };
    let mut checks = variance_checks(&s, var_x, var_p, k);
    let mut notes = BTreeMap::new();
    if input_var <= VAR_COH {
        checks.push(Check::new("mean_x", s.mean_x(), spec.gain() * alpha, s.x.se_mean(), k));
    }
    if kind != AmplifierKind::PhaseSensitive {
        let nf = measured_noise_figure(&s, &spec, input_var);
        checks.push(Check::new(
            "noise_figure",
            nf.value,
            predicted_noise_figure(&spec, input_var)?,
            nf.se,
            k,
        ));
    }
    notes.insert("var_units".to_string(), var_x / VAR_COH);
    Ok(Outcome {
        stats: Some(s),
        checks,
        notes,
    })
}

fn cascade_point(p: &Params, trials: u64, stream: RngStream, k: f64) -> Result<Outcome> {
    let g2 = p.req("G")?;
    let stages = p.count_or("stages", 2)?;
    if stages == 0 {
        return Err(plan_error("`stages` must be >= 1"));
    }
    let alpha = p.or("alpha", 1.0)?;
    let specs = split_gain(g2, stages);
    let single = (2.0 * g2 - 1.0) * VAR_COH;
    let folded = cascade(&specs, NoiseBudget::pure())?;
    let s = simulate_chain(&specs, ComplexAmplitude::new(alpha, 0.0), trials, stream)?;
    let mut checks = vec![Check::new("closed_form_fold", folded.variance(), single, 0.0, k)];
    checks.extend(variance_checks(&s, single, single, k));
    checks.push(Check::new("mean_x", s.mean_x(), g2.sqrt() * alpha, s.x.se_mean(), k));
    let notes = BTreeMap::from([
        ("quantum_units".to_string(), folded.quantum_units),
        ("classical_units".to_string(), folded.classical_units),
        ("stage_gain".to_string(), specs[0].intensity_gain()),
    ]);
    Ok(Outcome {
        stats: Some(s),
        checks,
        notes,
    })
}

fn lock_point(p: &Params, trials: u64, stream: RngStream, k: f64) -> Result<Outcome> {
    let n = p.req("n")?;
    let dpsi = p.req("dpsi")?;
    let rate = two_beam_click_rate(n, dpsi);
    let counts = simulate_click_counts(n, dpsi, trials, stream)?;
    let checks = vec![
        Check::new("click_mean", counts.mean(), rate, counts.se_mean(), k),
        Check::new("click_var", counts.variance(), rate, counts.se_variance(), k),
    ];
    let mut notes = BTreeMap::from([("click_rate".to_string(), rate)]);

    // Optional locking-loop run, seeded from the first unused trial stream.
    if let Some(beams) = p.num("N")? {
        let beams = as_count(beams, "N")?;
        let mut cfg = FeedbackConfig::new(beams, n);
        cfg.drift_var = p.or("drift_var", 0.0)?;
        cfg.gain = p.or("gain", 1.0)?;
        cfg.intervals = p.count_or("intervals", 50)?;
        cfg.initial_phases = (0..beams).map(|i| if i == 0 { dpsi } else { 0.0 }).collect();
        let feedback_stream = if trials < (1 << TRIAL_BITS) {
            stream.trial(trials)
        } else {
            return Err(plan_error("too many trials"));
        };
        let state = run_feedback(&cfg, feedback_stream)?;
        let sql = sql_phase_variance(beams, n)?;
        notes.insert("sql_phase_var".to_string(), sql);
        notes.insert("steady_state_var".to_string(), state.steady_state_var());
        notes.insert("steady_state_sql_ratio".to_string(), state.steady_state_var() / sql);
        notes.insert("final_var".to_string(), state.final_var());
    }
    Ok(Outcome {
        stats: None,
        checks,
        notes,
    })
}

fn gamma_point(p: &Params, trials: u64, stream: RngStream, k: f64) -> Result<Outcome> {
    let beams = p.count("N")?;
    let v = p.req("phase_var")?;
    let m: Moments = gamma_sum_statistics(beams, v, trials, stream)?;
    let nb = beams as f64;
    Ok(Outcome {
        stats: None,
        checks: vec![
            Check::new("sum_sq_mean", m.mean(), nb * v, m.se_mean(), k),
            Check::new("sum_sq_var", m.variance(), 2.0 * nb * v * v, m.se_variance(), k),
        ],
        notes: BTreeMap::from([
            ("gamma_shape".to_string(), nb / 2.0),
            ("gamma_scale".to_string(), 2.0 * v),
        ]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn exact_checks() {
        assert_eq!(Check::new("a", 7.0, 7.0, 0.0, 5.0).z, 0.0);
        let bad = Check::new("a", 7.1, 7.0, 0.0, 5.0);
        assert!(bad.z.is_infinite() && !bad.pass);
        let c = Check::new("a", 1.5, 1.0, 0.1, 5.0);
        assert!((c.z - 5.0).abs() < 1e-12);
    }

    #[test]
    fn unit_gain_amp_is_identity() {
        let plan = ExperimentPlan::new(Experiment::Amp, 1, 20_000).with_point([("G", 1.0)]);
        let r = run_plan(&plan).unwrap();
        let var_x = &r.points[0].checks[0];
        assert!((var_x.predicted - 0.25).abs() < 1e-15);
        assert!(var_x.z.abs() < 5.0);
        assert!(r.pass);
    }

    #[test]
    fn missing_parameters_are_errors() {
        let plan = ExperimentPlan::new(Experiment::Cbc, 1, 100).with_point([("N", 4.0)]);
        assert!(matches!(run_plan(&plan), Err(Error::Plan(_))));
        let plan = ExperimentPlan::new(Experiment::Cbc, 1, 100)
            .with_point([("N", 4.0), ("n", 10.0), ("xi", 1.0), ("phase_var", 0.1)]);
        assert!(run_plan(&plan).is_err());
        let plan = ExperimentPlan::new(Experiment::Amp, 1, 100)
            .with_point([("G", ParamValue::Num(2.0)), ("kind", ParamValue::from("laser"))]);
        assert!(run_plan(&plan).is_err());
        let plan = ExperimentPlan::new(Experiment::Gamma, 1, 100);
        assert!(run_plan(&plan).is_err());
    }

    #[test]
    fn every_experiment_runs() {
        let points: [(Experiment, Vec<(&str, ParamValue)>); 5] = [
            (Experiment::Cbc, vec![("N", 4.0.into()), ("n", 100.0.into()), ("xi", 1.0.into())]),
            (Experiment::Amp, vec![("G", 4.0.into()), ("kind", "measure_prepare".into())]),
            (Experiment::Cascade, vec![("G", 4.0.into()), ("stages", 2.0.into())]),
            (
                Experiment::Lock,
                vec![("n", 8.0.into()), ("dpsi", 0.5.into()), ("N", 3.0.into()), ("intervals", 10.0.into())],
            ),
            (Experiment::Gamma, vec![("N", 10.0.into()), ("phase_var", 0.01.into())]),
        ];
        for (e, point) in points {
            let plan = ExperimentPlan::new(e, 99, 50_000).with_point(point);
            let r = run_plan(&plan).unwrap();
            assert!(r.pass, "{e}: {:?}", r.points[0].checks);
        }
    }
}
