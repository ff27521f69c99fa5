use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::composite::bootstrap_exponents;
use qclab::QcError;

use super::{job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Cell, Comparison, ExperimentReport, Flag, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub q0: f64,
    /// Index `n` of the excluded value `2^n / (2^(n-1) - 1)` probed for rejection.
    pub excluded_n: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self { q0: 2.5, excluded_n: 3 }
    }
}

const TOLERANCES: &[(&str, f64)] = &[("doubling_identity", 1e-12)];

fn validate(p: &Params, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &[])?;
    if !(3..=64).contains(&p.excluded_n) {
        return Err("excluded_n must lie in 3..=64".into());
    }
    Ok(())
}

pub fn prepare(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, TOLERANCES, validate, run)
}

pub fn excluded_value(n: u32) -> f64 {
    2f64.powi(n as i32) / (2f64.powi(n as i32 - 1) - 1.0)
}

fn run(s: &Setup<Params>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let mut r = s.report(json!({}));
    let ledger = bootstrap_exponents(p.q0)?;
    r.series("sequence", ledger.sequence.clone());
    r.scalar("k0", ledger.k0 as f64);
    r.scalar("doubling_drift", ledger.doubling_drift);
    r.flag(Flag::compare(
        "doubling_identity",
        "composite: 1 - 2/q_{k+1} = 2 (1 - 2/q_k) at every step",
        ledger.doubling_drift,
        Comparison::AtMost,
        s.tol.get("doubling_identity"),
    ));
    let seq = &ledger.sequence;
    r.flag(Flag::holds(
        "terminates_above_four",
        "composite: the recursion stops at the first q_k > 4",
        seq[ledger.k0] > 4.0 && seq[..ledger.k0].iter().all(|q| *q <= 4.0),
    ));
    let probe = excluded_value(p.excluded_n);
    r.scalar("excluded_probe", probe);
    let rejected = matches!(bootstrap_exponents(probe), Err(QcError::DegenerateExponent));
    r.flag(Flag::holds(
        "excluded_rejected",
        "composite: starting values landing exactly on 4 are rejected",
        rejected,
    ));
    let cols: Vec<String> = (0..seq.len()).map(|k| format!("q_{k}")).collect();
    let mut t = Table::new("bootstrap", &cols.iter().map(String::as_str).collect::<Vec<_>>());
    t.push(seq.iter().map(|q| Cell::Num(*q)).collect());
    r.table(t);
    Ok(r)
}
