//! Experiment configuration and sweep expansion.
//!
//! A config is a JSON document. Sweeps name dotted paths into that document
//! (`"model.off.ratio_b"`, `"cost.delta"`) and are expanded Cartesian-wise
//! before the typed config is built, so every substituted point goes through
//! the same validation as a hand-written file.

use agpw_core::{AgpModel, CostParams, Grid, LifeCycleParams, SeriesTruncation, SimConfig, WarrantyPolicy};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const DEFAULT_SWEEP_LIMIT: usize = 10_000;
pub const DEFAULT_RFRW_TERMS: usize = 500;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: AgpModel,
    pub cost: CostParams,
    pub policy: WarrantyPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub life_cycle: Option<LifeCycleParams>,
    /// Defaults to `dt = T/4096` on `[0, max(3T, 2L)]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub truncation: SeriesTruncation,
    pub sim: SimConfig,
    /// Partial sums reported for a renewing warranty.
    #[serde(default = "default_rfrw_terms")]
    pub rfrw_terms: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn default_rfrw_terms() -> usize {
    DEFAULT_RFRW_TERMS
}

/// One axis or a list of axes; several axes form a Cartesian product.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    One(SweepAxis),
    Many(Vec<SweepAxis>),
}

impl Sweep {
    pub fn axes(&self) -> &[SweepAxis] {
        match self {
            Sweep::One(a) => std::slice::from_ref(a),
            Sweep::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<Value>,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid, CliError> {
        if let Some(g) = self.grid {
            return Ok(Grid::new(g.t_max, g.dt)?);
        }
        let period = self.policy.period();
        let reach = self.life_cycle.map_or(0.0, |lc| 2.0 * lc.length());
        Ok(Grid::covering(period, reach.max(3.0 * period))?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.policy.validate()?;
        self.truncation.validate()?;
        self.sim.validate()?;
        let grid = self.grid()?;
        if grid.index_of(self.policy.period()).is_none() {
            return Err(CliError::Config(format!(
                "grid: T = {} must be a grid node (dt = {})",
                self.policy.period(),
                grid.dt
            )));
        }
        if let Some(lc) = self.life_cycle {
            if lc.length() > grid.last_t() {
                return Err(CliError::Config(format!(
                    "grid.t_max: {} does not reach life_cycle.L = {}",
                    grid.last_t(),
                    lc.length()
                )));
            }
        }
        if self.rfrw_terms < 1 {
            return Err(CliError::Config("rfrw_terms: must be >= 1".into()));
        }
        Ok(())
    }
}

/// A fully substituted configuration and the sweep values that produced it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub assignments: Vec<(String, Value)>,
    pub config: ExperimentConfig,
    /// The resolved document, sweep removed.
    pub document: Value,
}

pub fn parse_document(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))
}

pub fn typed(document: &Value) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(document).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("{path}: {inner}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Expands the sweep of `document` (if any) into concrete points, in
/// row-major order over the listed axes.
pub fn expand(document: &Value, limit: usize) -> Result<Vec<SweepPoint>, CliError> {
    let base = typed(document)?;
    let mut stripped = document.clone();
    if let Some(obj) = stripped.as_object_mut() {
        obj.remove("sweep");
    }
    let Some(sweep) = &base.sweep else {
        let config = typed(&stripped)?;
        return Ok(vec![SweepPoint {
            assignments: Vec::new(),
            config,
            document: stripped,
        }]);
    };
    let axes = sweep.axes();
    if axes.is_empty() {
        return Err(CliError::Config("sweep: no axes listed".into()));
    }
    let mut combos: usize = 1;
    for axis in axes {
        if axis.values.is_empty() {
            return Err(CliError::Config(format!("sweep `{}`: values list is empty", axis.path)));
        }
        if stripped.pointer(&pointer(&axis.path)).is_none() {
            return Err(CliError::Config(format!("sweep: path `{}` does not exist in the config", axis.path)));
        }
        combos = combos.saturating_mul(axis.values.len());
    }
    if combos > limit {
        return Err(CliError::Config(format!(
            "sweep has {combos} combinations, above the limit of {limit} (raise --sweep-limit)"
        )));
    }
    let mut points = Vec::with_capacity(combos);
    for flat in 0..combos {
        let mut rest = flat;
        let mut picks = vec![0; axes.len()];
        for (k, axis) in axes.iter().enumerate().rev() {
            picks[k] = rest % axis.values.len();
            rest /= axis.values.len();
        }
        let mut doc = stripped.clone();
        let mut assignments = Vec::with_capacity(axes.len());
        for (axis, &pick) in axes.iter().zip(&picks) {
            let value = axis.values[pick].clone();
            *doc.pointer_mut(&pointer(&axis.path)).expect("path checked above") = value.clone();
            assignments.push((axis.path.clone(), value));
        }
        let config = typed(&doc).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("sweep point {}: {msg}", describe(&assignments))),
            other => other,
        })?;
        points.push(SweepPoint {
            assignments,
            config,
            document: doc,
        });
    }
    Ok(points)
}

fn describe(assignments: &[(String, Value)]) -> String {
    assignments.iter().map(|(p, v)| format!("{p}={v}")).collect::<Vec<_>>().join(", ")
}

/// `"a.b.0"` as the JSON pointer `"/a/b/0"`.
fn pointer(path: &str) -> String {
    path.split('.').map(|k| format!("/{}", k.replace('~', "~0").replace('/', "~1"))).collect()
}
