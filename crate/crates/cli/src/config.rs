//! JSON run configuration.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use twomode::classify::Instances;
use twomode::{AtomicLabel, Backend, FieldSpec, ModelConfig, Scheme, TimeGrid, Tolerances};

/// Quantities written by `simulate`, in CSV column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Column {
    Concurrence,
    Eof,
    NegativityAtoms,
    /// Needs a pure full state on a two-mode layout.
    NegativityFields,
}

impl Column {
    pub fn header(self) -> &'static str {
        match self {
            Self::Concurrence => "concurrence",
            Self::Eof => "eof",
            Self::NegativityAtoms => "negativity_atoms",
            Self::NegativityFields => "negativity_fields",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// CSV or report path; stdout when absent. `--out` takes precedence.
    pub path: Option<String>,
}

/// Everything a subcommand needs. Missing keys take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub g: f64,
    pub atoms: AtomicLabel,
    pub field: FieldSpec,
    /// Per-mode Fock cutoff; chosen from the field's tail when null.
    pub cutoff: Option<usize>,
    pub excitation_cap: Option<usize>,
    pub grid: TimeGrid,
    pub tolerances: Tolerances,
    pub backend: Backend,
    pub measures: Vec<Column>,
    /// Largest trace distance accepted by `verify`.
    pub verify_bound: f64,
    /// Parameter instances for `table1`.
    pub table1: Instances,
    pub output: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Tmsc,
            g: 1.0,
            atoms: AtomicLabel::Phi,
            field: FieldSpec::Vacuum,
            cutoff: None,
            excitation_cap: None,
            grid: TimeGrid::default(),
            tolerances: Tolerances::default(),
            backend: Backend::Auto,
            measures: vec![Column::Concurrence, Column::Eof, Column::NegativityAtoms],
            verify_bound: 1e-8,
            table1: Instances::default(),
            output: Outputs::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        self.model().validate().map_err(|e| format!("config: {e}"))?;
        self.grid.validate().map_err(|e| format!("config: {e}"))?;
        if !(self.verify_bound > 0.0) {
            return Err("config: verify_bound must be positive".into());
        }
        Ok(())
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            scheme: self.scheme,
            g: self.g,
            cutoff: self.cutoff,
            excitation_cap: self.excitation_cap,
            grid: self.grid,
            tolerances: self.tolerances,
            backend: self.backend,
        }
    }

    /// Requested columns, deduplicated, in canonical order.
    pub fn columns(&self) -> Vec<Column> {
        let mut cols = self.measures.clone();
        cols.sort();
        cols.dedup();
        cols
    }
}

/// Values of a swept parameter: an explicit list, or `count` evenly spaced
/// points from `start` to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl SweepValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

/// A config with one number replaced by `{"sweep": ...}`.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Dotted path of the swept number, e.g. `field.Thermal.nbar`.
    pub parameter: String,
    pub values: Vec<f64>,
    template: Value,
}

fn find_sweeps(v: &Value, path: &mut Vec<String>, found: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            if map.len() == 1 {
                if let Some(spec) = map.get("sweep") {
                    found.push((path.join("."), spec.clone()));
                    return;
                }
            }
            for (k, child) in map {
                path.push(k.clone());
                find_sweeps(child, path, found);
                path.pop();
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                path.push(i.to_string());
                find_sweeps(child, path, found);
                path.pop();
            }
        }
        _ => {}
    }
}

fn slot<'a>(v: &'a mut Value, path: &str) -> &'a mut Value {
    path.split('.').fold(v, |node, key| match node {
        Value::Array(items) => &mut items[key.parse::<usize>().expect("array index")],
        other => &mut other[key],
    })
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let template: Value = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        let mut found = Vec::new();
        find_sweeps(&template, &mut Vec::new(), &mut found);
        let (parameter, spec) = match found.len() {
            0 => return Err("config: no parameter is marked with {\"sweep\": ...}".into()),
            1 => found.remove(0),
            n => {
                let names: Vec<String> = found.into_iter().map(|(p, _)| p).collect();
                return Err(format!("config: exactly one swept parameter allowed, found {n}: {}", names.join(", ")));
            }
        };
        let values = serde_json::from_value::<SweepValues>(spec)
            .map_err(|e| format!("config: sweep of {parameter}: {e}"))?
            .values();
        if values.is_empty() {
            return Err(format!("config: sweep of {parameter} has no values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("config: sweep of {parameter} has non-finite values"));
        }
        let sweep = Self { parameter, values, template };
        for &v in &sweep.values {
            sweep.instance(v)?;
        }
        Ok(sweep)
    }

    /// The config with the swept slot set to `value`. Integer slots take
    /// the value rounded when it is integral.
    pub fn instance(&self, value: f64) -> Result<RunConfig, String> {
        let mut v = self.template.clone();
        let number = if value.fract() == 0.0 && value >= 0.0 && value < 9.0e15 {
            serde_json::json!(value as u64)
        } else {
            serde_json::json!(value)
        };
        *slot(&mut v, &self.parameter) = number.clone();
        let attempt = serde_json::from_value::<RunConfig>(v.clone()).or_else(|_| {
            *slot(&mut v, &self.parameter) = serde_json::json!(value);
            serde_json::from_value::<RunConfig>(v)
        });
        let cfg = attempt.map_err(|e| format!("config: {} = {value}: {e}", self.parameter))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn base(&self) -> Result<RunConfig, String> {
        self.instance(self.values[0])
    }
}
