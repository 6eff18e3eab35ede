use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use qcbc_core::amplifier::{predict_variance, AmplifierKind, AmplifierSpec, NoiseBudget};
use qcbc_core::cbc::{predict_output, xi_threshold};
use qcbc_core::engine::{ParamValue, DEFAULT_TRIALS};
use qcbc_core::{run_plan, CbcConfig, Experiment, ExperimentPlan, ExperimentResult, VAR_COH};

use crate::output::{Cell, Table};

const ABS: &str = "quadrature variance, absolute (Var_coh = 1/4)";
const UNITS: &str = "Var_coh";
const VARIANCE: &str = "variance (absolute)";

/// Parses a trial count, accepting exponent notation such as `1e6`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0) {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| anyhow!("{flag}: `{t}` is not a number"))
        })
        .collect()
}

/// Beam counts from `a..b` (inclusive) or a comma list.
pub fn parse_beam_range(s: &str) -> Result<Vec<usize>> {
    let beams: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("-N: bad range start in `{s}`"))?;
        let b: usize = b.trim().trim_start_matches('=').parse().with_context(|| format!("-N: bad range end in `{s}`"))?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().with_context(|| format!("-N: `{t}` is not a beam count")))
            .collect::<Result<_>>()?
    };
    if beams.is_empty() {
        bail!("-N: empty range `{s}`");
    }
    Ok(beams)
}

fn warn_small_angle(config: &CbcConfig) -> Result<()> {
    if !config.small_angle_ok()? {
        eprintln!(
            "warning: Var(psi) = {} rad^2 exceeds the small-angle limit; the closed-form predictions are second order in Var(psi)",
            config.phase_var()?
        );
    }
    Ok(())
}

pub struct PredictRequest {
    pub cbc: bool,
    pub amp: bool,
    pub threshold: bool,
    pub beams: Option<usize>,
    pub photons: Option<f64>,
    pub xi: Option<f64>,
    pub phase_var: Option<f64>,
    pub gain: Option<f64>,
}

pub fn predict(req: &PredictRequest) -> Result<Table> {
    let all = !(req.cbc || req.amp || req.threshold);
    let mut cells: Vec<(&str, &str, Cell)> = Vec::new();

    if req.cbc || all {
        let beams = req.beams.ok_or_else(|| anyhow!("--cbc needs -N"))?;
        let n = req.photons.ok_or_else(|| anyhow!("--cbc needs -n"))?;
        let config = match (req.xi, req.phase_var) {
            (_, Some(v)) => CbcConfig::with_phase_var(beams, n, v),
            (xi, None) => CbcConfig::with_xi(beams, n, xi.unwrap_or(1.0)),
        };
        let pred = predict_output(&config)?;
        warn_small_angle(&config)?;
        cells.extend([
            ("N", "beams", beams.into()),
            ("n", "photons per beam", n.into()),
            ("xi", "Var(psi)/Var_SQL", config.xi()?.into()),
            ("phase_var", "rad^2", pred.phase_var.into()),
            ("cbc_mean_amplitude", "sqrt(photons)", pred.mean_amplitude.into()),
            ("cbc_var_x", ABS, pred.var_x.into()),
            ("cbc_var_x_units", UNITS, (pred.var_x / VAR_COH).into()),
            ("cbc_var_p", ABS, pred.var_p.into()),
            ("cbc_var_p_units", UNITS, (pred.var_p / VAR_COH).into()),
        ]);
    }
    if req.amp || all {
        let g2 = match (req.gain, req.beams) {
            (Some(g), _) => g,
            (None, Some(n)) => n as f64,
            (None, None) => bail!("--amp needs -G (or -N for G = N)"),
        };
        let spec = AmplifierSpec::from_intensity_gain(g2, AmplifierKind::QuantumLimited);
        let out = predict_variance(&spec, NoiseBudget::pure())?;
        cells.extend([
            ("G", "intensity gain", g2.into()),
            ("amp_var", ABS, out.variance().into()),
            ("amp_var_units", UNITS, out.total_units().into()),
        ]);
    }
    if req.threshold || all {
        let beams = req.beams.ok_or_else(|| anyhow!("--threshold needs -N"))?;
        if !cells.iter().any(|(k, _, _)| *k == "N") {
            cells.push(("N", "beams", beams.into()));
        }
        cells.push(("xi_threshold", "Var(psi)/Var_SQL", xi_threshold(beams)?.into()));
    }

    let mut table = Table::default();
    table.meta("command", "predict");
    table.push_row(cells);
    Ok(table)
}

/// Grid values given on the command line, keyed by plan parameter name.
#[derive(Default)]
pub struct GridFlags {
    pub values: Vec<(&'static str, &'static str, String)>,
}

impl GridFlags {
    pub fn add(&mut self, key: &'static str, flag: &'static str, value: Option<&String>) {
        if let Some(v) = value {
            self.values.push((key, flag, v.clone()));
        }
    }
}

fn allowed_keys(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Cbc => &["N", "n", "xi", "phase_var"],
        Experiment::Amp => &["G", "kind", "n_cl", "input_var", "alpha"],
        Experiment::Cascade => &["G", "stages", "alpha"],
        Experiment::Lock => &["n", "dpsi", "N", "drift_var", "gain", "intervals"],
        Experiment::Gamma => &["N", "phase_var"],
    }
}

pub struct SimulateRequest {
    pub experiment: Option<Experiment>,
    pub plan: Option<PathBuf>,
    pub grid: GridFlags,
    pub trials: Option<u64>,
    /// Explicit `--seed`; overrides the plan file.
    pub seed: Option<u64>,
    /// Used when neither `--seed` nor a plan file gives one.
    pub fallback_seed: u64,
    pub workers: Option<usize>,
    pub tolerance_k: Option<f64>,
}

pub fn build_plan(req: &SimulateRequest) -> Result<ExperimentPlan> {
    let mut plan = match &req.plan {
        Some(path) => {
            if let Some((_, flag, _)) = req.grid.values.first() {
                bail!("{flag} cannot be combined with --plan; put the axis in the plan file");
            }
            let plan = ExperimentPlan::from_file(path)?;
            if let Some(e) = req.experiment {
                if e != plan.experiment {
                    bail!("plan file is a `{}` experiment, not `{e}`", plan.experiment);
                }
            }
            plan
        }
        None => {
            let experiment = req
                .experiment
                .ok_or_else(|| anyhow!("name an experiment ({}) or pass --plan", experiment_names()))?;
            let allowed = allowed_keys(experiment);
            let mut axes = Vec::new();
            for (key, flag, raw) in &req.grid.values {
                if !allowed.contains(key) {
                    bail!("{flag} is not a parameter of the `{experiment}` experiment");
                }
                let values: Vec<ParamValue> = if *key == "kind" {
                    raw.split(',').map(|t| ParamValue::Text(t.trim().to_string())).collect()
                } else {
                    parse_list(flag, raw)?.into_iter().map(ParamValue::Num).collect()
                };
                axes.push((key.to_string(), values));
            }
            if axes.is_empty() {
                bail!("no parameters given for `{experiment}`");
            }
            ExperimentPlan::new(experiment, req.seed.unwrap_or(req.fallback_seed), DEFAULT_TRIALS).with_axes(axes)
        }
    };
    if let Some(seed) = req.seed {
        plan.master_seed = seed;
    }
    if let Some(t) = req.trials {
        plan.trials = t;
    }
    if let Some(w) = req.workers {
        plan.workers = Some(w);
    }
    if let Some(k) = req.tolerance_k {
        plan.tolerance_k = k;
    }
    plan.validate()?;
    Ok(plan)
}

fn experiment_names() -> String {
    Experiment::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}

fn unit_of(quantity: &str) -> &'static str {
    match quantity {
        "var_x" | "var_p" | "closed_form_fold" => VARIANCE,
        "mean_amplitude" | "mean_x" => "sqrt(photons)",
        "noise_figure" => "SNR_in/SNR_out",
        "click_mean" => "photons per window",
        "click_var" => "photons^2 per window",
        "sum_sq_mean" => "rad^2",
        "sum_sq_var" => "rad^4",
        _ => "",
    }
}

pub fn simulation_table(result: &ExperimentResult) -> Table {
    let mut table = Table::default();
    table.meta("command", "simulate");
    table.meta("experiment", result.experiment.name());
    table.meta("seed", result.master_seed);
    table.meta("trials", result.trials);
    table.meta("tolerance_k", result.tolerance_k);
    table.meta("pass", result.pass);

    let mut keys: Vec<&String> = result.points.iter().flat_map(|p| p.params.keys()).collect();
    keys.sort();
    keys.dedup();

    for point in &result.points {
        let params = || {
            keys.iter().map(|k| {
                let cell = match point.params.get(*k) {
                    Some(ParamValue::Num(v)) => Cell::Num(*v),
                    Some(ParamValue::Text(s)) => Cell::Text(s.clone()),
                    None => Cell::Empty,
                };
                (k.as_str(), "parameter", cell)
            })
        };
        for c in &point.checks {
            let mut cells = vec![("point", "grid index", Cell::from(point.index))];
            cells.extend(params());
            cells.extend([
                ("kind", "", Cell::from("check")),
                ("quantity", "", Cell::from(c.quantity.as_str())),
                ("unit", "", Cell::from(unit_of(&c.quantity))),
                ("measured", "see unit", Cell::from(c.measured)),
                ("predicted", "see unit", Cell::from(c.predicted)),
                ("se", "see unit", Cell::from(c.se)),
                ("z", "standard errors", Cell::from(c.z)),
                ("pass", "|z| <= tolerance_k", Cell::from(c.pass)),
            ]);
            if unit_of(&c.quantity) == VARIANCE {
                cells.push(("measured_units", UNITS, Cell::from(c.measured / VAR_COH)));
                cells.push(("predicted_units", UNITS, Cell::from(c.predicted / VAR_COH)));
            }
            table.push_row(cells);
        }
        for (name, value) in &point.notes {
            let mut cells = vec![("point", "grid index", Cell::from(point.index))];
            cells.extend(params());
            cells.extend([
                ("kind", "", Cell::from("note")),
                ("quantity", "", Cell::from(name.as_str())),
                ("measured", "see unit", Cell::from(*value)),
            ]);
            table.push_row(cells);
        }
    }
    table
}

pub fn simulate(req: &SimulateRequest) -> Result<(Table, bool)> {
    let plan = build_plan(req)?;
    eprintln!("seed: {}", plan.master_seed);
    let result = run_plan(&plan)?;
    if result.experiment == Experiment::Cbc {
        for p in &result.points {
            if p.notes.get("small_angle_ok") == Some(&0.0) {
                eprintln!(
                    "warning: point {} has Var(psi) = {} rad^2, beyond the small-angle limit",
                    p.index, p.notes["phase_var"]
                );
            }
        }
    }
    Ok((simulation_table(&result), result.pass))
}

/// One entry of the `--xi` list of `compare`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiChoice {
    Value(f64),
    Threshold,
}

pub fn parse_xi_list(s: &str) -> Result<Vec<XiChoice>> {
    let list: Vec<XiChoice> = s
        .split(',')
        .map(|t| match t.trim() {
            "threshold" | "star" => Ok(XiChoice::Threshold),
            t => t
                .parse()
                .map(XiChoice::Value)
                .map_err(|_| anyhow!("--xi: `{t}` is not a number or `threshold`")),
        })
        .collect::<Result<_>>()?;
    if list.is_empty() {
        bail!("--xi: empty list");
    }
    Ok(list)
}

pub fn compare(beams: &[usize], photons: f64, xis: &[XiChoice]) -> Result<Table> {
    let mut table = Table::default();
    table.meta("command", "compare");
    table.meta("n", photons);
    for &xi_choice in xis {
        for &n_beams in beams {
            let threshold = xi_threshold(n_beams)?;
            let xi = match xi_choice {
                XiChoice::Value(v) => v,
                XiChoice::Threshold => threshold,
            };
            if xi < 1.0 && xi_choice == XiChoice::Threshold {
                eprintln!("note: N={n_beams}: xi* = {threshold} is below the SQL (xi >= 1); row omitted");
                continue;
            }
            let config = CbcConfig::with_xi(n_beams, photons, xi);
            let cbc = predict_output(&config)?;
            let amp = predict_variance(&AmplifierSpec::from_intensity_gain(n_beams as f64, AmplifierKind::QuantumLimited), NoiseBudget::pure())?;
            table.push_row(vec![
                ("N", "beams", n_beams.into()),
                ("n", "photons per beam", photons.into()),
                ("xi", "Var(psi)/Var_SQL", xi.into()),
                ("phase_var", "rad^2", cbc.phase_var.into()),
                ("cbc_var_x", ABS, cbc.var_x.into()),
                ("cbc_var_x_units", UNITS, (cbc.var_x / VAR_COH).into()),
                ("cbc_var_p", ABS, cbc.var_p.into()),
                ("cbc_var_p_units", UNITS, (cbc.var_p / VAR_COH).into()),
                ("amp_var", "quantum-limited amplifier at G = N, absolute", amp.variance().into()),
                ("amp_var_units", UNITS, amp.total_units().into()),
                ("xi_threshold", "Var(psi)/Var_SQL", threshold.into()),
                ("cbc_worse", "xi > xi_threshold", (xi > threshold).into()),
            ]);
        }
    }
    if table.rows.is_empty() {
        bail!("no rows to compare");
    }
    Ok(table)
}
