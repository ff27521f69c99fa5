//! Run configuration.
//!
//! A config file is either one scenario object or `{"scenarios": [...]}` with
//! optional shared `seed` and `output_dir`:
//!
//! ```json
//! {
//!   "output_dir": "out",
//!   "seed": 7,
//!   "scenarios": [
//!     { "scenario": "bootstrap", "params": { "q0": 2.5 } },
//!     { "scenario": "green-solver", "grid": { "n_r": 64, "n_theta": 128 } }
//!   ]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SEED_ENV: &str = "QC_LAB_SEED";

/// Grid overrides; each scenario documents which fields it reads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    /// Side length in nodes of the square grid.
    pub n: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Scenario-specific family parameters (typed per scenario).
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ScenarioConfig {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            seed: None,
            grid: GridConfig::default(),
            params: empty_object(),
            tolerances: BTreeMap::new(),
            output_dir: None,
        }
    }

    /// Typed view of `params`; unknown keys are rejected.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P, CliError> {
        let v = if self.params.is_null() {
            empty_object()
        } else {
            self.params.clone()
        };
        serde_json::from_value(v)
            .map_err(|e| CliError::Config(format!("{}: params: {e}", self.scenario)))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Batch {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<String>,
    scenarios: Vec<ScenarioConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output_dir: Option<String>,
    pub scenarios: Vec<ScenarioConfig>,
}

/// Parses a config document. Batch-level `seed` and `output_dir` fill in
/// scenarios that leave them unset.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
    let run = if value.get("scenarios").is_some() {
        let b: Batch = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        RunConfig {
            output_dir: b.output_dir,
            scenarios: b
                .scenarios
                .into_iter()
                .map(|mut s| {
                    s.seed = s.seed.or(b.seed);
                    s
                })
                .collect(),
        }
    } else {
        let s: ScenarioConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        RunConfig {
            output_dir: s.output_dir.clone(),
            scenarios: vec![s],
        }
    };
    if run.scenarios.is_empty() {
        return Err(CliError::Config("no scenarios listed".into()));
    }
    for s in &run.scenarios {
        for (name, tol) in &s.tolerances {
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "{}: tolerance {name} = {tol} must be positive",
                    s.scenario
                )));
            }
        }
    }
    Ok(run)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// `QC_LAB_SEED` when set, else the configured seed, else 0.
pub fn effective_seed(configured: Option<u64>) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(configured.unwrap_or(0)),
    }
}

/// Default tolerances merged with overrides; unknown names are rejected.
#[derive(Debug, Clone)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn resolve(
        scenario: &str,
        defaults: &[(&str, f64)],
        overrides: &BTreeMap<String, f64>,
    ) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, f64> =
            defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in overrides {
            match map.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
                    return Err(CliError::Config(format!(
                        "{scenario}: unknown tolerance {k:?} (known: {})",
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}
