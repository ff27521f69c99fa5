use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::beltrami::psi_deviation;
use qclab::composite::lipschitz_bound_formula;
use qclab::diagnostics::lipschitz_estimate;
use qclab::maps::{make_test_family, TestFamily};
use qclab::DiscGrid;

use super::{decreasing_strictly, job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Comparison, ExperimentReport, Flag, Plot, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Members `n = 1..=levels`, all scales `2^-n`.
    pub levels: u32,
    /// Exponent of the Laplacian norm.
    pub p: f64,
    /// Constant in the explicit Lipschitz bound.
    pub c_p: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            levels: 6,
            p: 4.0,
            c_p: 1.0,
        }
    }
}

const TOLERANCES: &[(&str, f64)] = &[("final_lipschitz", 1.05), ("final_bound", 1.1)];

fn validate(p: &Params, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n_r", "n_theta"])?;
    if !(2..=20).contains(&p.levels) {
        return Err("levels must lie in 2..=20".into());
    }
    if !(p.p > 2.0) || !(p.c_p > 0.0) {
        return Err("need p > 2 and c_p > 0".into());
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

fn run(s: &Setup<Params>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let n_r = s.grid.n_r.unwrap_or(64);
    let n_theta = s.grid.n_theta.unwrap_or(128);
    let mut r = s.report(json!({ "n_r": n_r, "n_theta": n_theta }));
    let g = Arc::new(DiscGrid::new(n_r, n_theta)?);
    let (mut scale, mut lip, mut bound, mut kk, mut lap, mut psi) =
        (vec![], vec![], vec![], vec![], vec![], vec![]);
    for n in 1..=p.levels {
        let fam = TestFamily::dyadic(n, p.p);
        let m = make_test_family(fam, &g)?;
        let l = lipschitz_estimate(&m.w)?;
        let ps = psi_deviation(&m.w_z, &m.w_zbar)?;
        let b = lipschitz_bound_formula(m.k_measured, m.laplacian_lp, p.c_p, ps)?;
        scale.push(fam.k);
        lip.push(l);
        bound.push(b);
        kk.push(m.k_measured);
        lap.push(m.laplacian_lp);
        psi.push(ps);
    }
    let last = lip.len() - 1;
    r.flag(Flag::holds(
        "lipschitz_decreasing",
        "diagnostics: sup |grad w_n| decreases along the family",
        decreasing_strictly(&lip),
    ));
    r.flag(Flag::compare(
        "lipschitz_final",
        "diagnostics: sup |grad w_n| -> 1",
        lip[last],
        Comparison::AtMost,
        s.tol.get("final_lipschitz"),
    ));
    r.flag(Flag::holds(
        "bound_decreasing",
        "composite: the explicit bound decreases with the scales",
        decreasing_strictly(&bound),
    ));
    r.flag(Flag::compare(
        "bound_final",
        "composite: K + c_p K psi / 2 + c_p (K + 4) t / 2 -> 1",
        bound[last],
        Comparison::AtMost,
        s.tol.get("final_bound"),
    ));
    // Informational: does the explicit bound dominate the measurement?
    let slack = lip.iter().zip(&bound).map(|(l, b)| b - l).fold(f64::INFINITY, f64::min);
    r.scalar("min_bound_minus_lipschitz", slack);
    r.scalar("final_lipschitz", lip[last]);
    r.scalar("final_bound", bound[last]);
    r.series("scale", scale.clone());
    r.series("lipschitz", lip.clone());
    r.series("bound", bound.clone());
    r.series("k_measured", kk.clone());
    r.series("laplacian_lp", lap.clone());
    r.series("psi_deviation", psi.clone());
    r.table(Table::from_columns(
        "trend",
        &[
            ("scale", &scale),
            ("lipschitz", &lip),
            ("bound", &bound),
            ("K", &kk),
            ("laplacian_lp", &lap),
            ("psi", &psi),
        ],
    ));
    r.plot(Plot {
        name: "trend".into(),
        title: "Lipschitz constant and explicit bound along the dyadic family".into(),
        x_label: "scale 2^-n".into(),
        y_label: "value".into(),
        log_x: true,
        log_y: false,
        lines: vec![
            ("measured".into(), scale.iter().copied().zip(lip.iter().copied()).collect()),
            ("bound".into(), scale.iter().copied().zip(bound.iter().copied()).collect()),
        ],
    });
    Ok(r)
}
