use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::plan_error;
use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_TOLERANCE_K: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Cbc,
    Amp,
    Cascade,
    Lock,
    Gamma,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Cbc,
        Experiment::Amp,
        Experiment::Cascade,
        Experiment::Lock,
        Experiment::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cbc => "cbc",
            Experiment::Amp => "amp",
            Experiment::Cascade => "cascade",
            Experiment::Lock => "lock",
            Experiment::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// One grid coordinate: a number or a keyword such as an amplifier kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Num(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

pub type GridPoint = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: Option<String>,
    pub experiment: Experiment,
    pub grid: Vec<GridPoint>,
    pub trials: u64,
    pub master_seed: u64,
    /// A check passes when |z| <= tolerance_k.
    pub tolerance_k: f64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
}

const RESERVED: [&str; 6] = ["experiment", "name", "seed", "trials", "tolerance_k", "workers"];

impl ExperimentPlan {
    pub fn new(experiment: Experiment, master_seed: u64, trials: u64) -> Self {
        Self {
            name: None,
            experiment,
            grid: Vec::new(),
            trials,
            master_seed,
            tolerance_k: DEFAULT_TOLERANCE_K,
            workers: None,
        }
    }

    pub fn with_point<K, V, I>(mut self, point: I) -> Self
    where
        K: Into<String>,
        V: Into<ParamValue>,
        I: IntoIterator<Item = (K, V)>,
    {
        self.grid
            .push(point.into_iter().map(|(k, v)| (k.into(), v.into())).collect());
        self
    }

    /// Replaces the grid with the Cartesian product of `axes` (last axis
    /// varies fastest).
    pub fn with_axes(mut self, axes: Vec<(String, Vec<ParamValue>)>) -> Self {
        self.grid = cartesian(&axes);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(plan_error(format!("trials must be >= 2, got {}", self.trials)));
        }
        if !(self.tolerance_k > 0.0 && self.tolerance_k.is_finite()) {
            return Err(plan_error(format!("tolerance_k must be positive, got {}", self.tolerance_k)));
        }
        if self.grid.is_empty() {
            return Err(plan_error("empty parameter grid"));
        }
        if self.grid.len() as u64 > crate::rng::MAX_BASE_INDEX {
            return Err(plan_error("parameter grid too large"));
        }
        if self.workers == Some(0) {
            return Err(plan_error("workers must be >= 1"));
        }
        Ok(())
    }

    /// Parses the flat key-value plan format.
    ///
    /// ```text
    /// experiment = "cbc"        # cbc | amp | cascade | lock | gamma
    /// name = "grid-a"           # optional
    /// seed = 7
    /// trials = 1000000          # optional, default 10^6
    /// tolerance_k = 5.0         # optional, default 5
    /// workers = 8               # optional
    /// N = [2, 4, 8]             # every other key is a grid axis:
    /// n = 100                   # a scalar or a list of numbers/strings
    /// xi = [1, 5]
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| plan_error(e.to_string()))?;

        let experiment = match table.get("experiment") {
            Some(toml::Value::String(s)) => s.parse()?,
            Some(other) => return Err(plan_error(format!("experiment must be a string, got {other}"))),
            None => return Err(plan_error("missing `experiment`")),
        };
        let master_seed = match table.get("seed") {
            Some(v) => non_negative_int(v, "seed")?,
            None => return Err(plan_error("missing `seed`")),
        };
        let trials = match table.get("trials") {
            Some(v) => non_negative_int(v, "trials")?,
            None => DEFAULT_TRIALS,
        };
        let tolerance_k = match table.get("tolerance_k") {
            Some(v) => number(v, "tolerance_k")?,
            None => DEFAULT_TOLERANCE_K,
        };
        let workers = table
            .get("workers")
            .map(|v| non_negative_int(v, "workers").map(|w| w as usize))
            .transpose()?;
        let name = match table.get("name") {
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(plan_error(format!("name must be a string, got {other}"))),
            None => None,
        };

        let mut axes = Vec::new();
        for (key, value) in &table {
            if RESERVED.contains(&key.as_str()) {
                continue;
            }
            let values = match value {
                toml::Value::Array(items) => items.iter().map(|v| param(v, key)).collect::<Result<Vec<_>>>()?,
                scalar => vec![param(scalar, key)?],
            };
            if values.is_empty() {
                return Err(plan_error(format!("axis `{key}` is empty")));
            }
            axes.push((key.clone(), values));
        }

        if axes.is_empty() {
            return Err(plan_error("no grid parameters given"));
        }
        let plan = ExperimentPlan {
            name,
            experiment,
            grid: cartesian(&axes),
            trials,
            master_seed,
            tolerance_k,
            workers,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| plan_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn cartesian(axes: &[(String, Vec<ParamValue>)]) -> Vec<GridPoint> {
    let mut grid = vec![GridPoint::new()];
    for (key, values) in axes {
        grid = grid
            .into_iter()
            .flat_map(|point| {
                values.iter().map(move |v| {
                    let mut p = point.clone();
                    p.insert(key.clone(), v.clone());
                    p
                })
            })
            .collect();
    }
    grid
}

fn number(v: &toml::Value, key: &str) -> Result<f64> {
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) => Ok(*f),
        other => Err(plan_error(format!("`{key}` must be a number, got {other}"))),
    }
}

fn non_negative_int(v: &toml::Value, key: &str) -> Result<u64> {
    let x = number(v, key)?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(plan_error(format!("`{key}` must be a non-negative integer, got {x}")));
    }
    Ok(x as u64)
}

fn param(v: &toml::Value, key: &str) -> Result<ParamValue> {
    match v {
        toml::Value::String(s) => Ok(ParamValue::Text(s.clone())),
        other => number(other, key).map(ParamValue::Num),
    }
}
