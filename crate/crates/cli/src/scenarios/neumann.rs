use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::beltrami::{
    beurling_norm_estimate_on, bump, principal_solve, psi_deviation, BeltramiProblem, DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
};
use qclab::grid::lp_norm_where;
use qclab::{Field, SquareGrid, C64};

use super::{decreasing_strictly, job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Comparison, ExperimentReport, Flag, Plot, Table};
use crate::CliError;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StretchParams {
    /// `w(z) = z |z|^alpha` inside the unit disc.
    pub alpha: f64,
    /// Error is measured on `|z| <= outer_radius` minus this annulus.
    pub excluded_annulus: [f64; 2],
    pub outer_radius: f64,
    /// Random trials for the `L^2` Beurling-norm proxy.
    pub norm_trials: usize,
}

impl Default for StretchParams {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            excluded_annulus: [0.9, 1.1],
            outer_radius: 2.0,
            norm_trials: 8,
        }
    }
}

const STRETCH_TOLERANCES: &[(&str, f64)] = &[
    ("stretch_relative_l2", 2e-2),
    ("decay_factor", 1.1),
    ("beltrami_residual", 1e-6),
];

fn validate_stretch(p: &StretchParams, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n", "half_width"])?;
    if !(p.alpha > 0.0 && p.alpha.is_finite()) {
        return Err("alpha must be positive".into());
    }
    if !(p.excluded_annulus[0] < 1.0 && p.excluded_annulus[1] > 1.0) {
        return Err("excluded_annulus must contain the unit circle".into());
    }
    if p.norm_trials == 0 {
        return Err("norm_trials must be positive".into());
    }
    Ok(())
}

pub fn prepare_stretch(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, STRETCH_TOLERANCES, validate_stretch, run_stretch)
}

fn square(s: &GridConfig, half_width: f64, n: usize) -> qclab::Result<(Arc<SquareGrid>, serde_json::Value)> {
    let (h, n) = (s.half_width.unwrap_or(half_width), s.n.unwrap_or(n));
    Ok((Arc::new(SquareGrid::new(h, n)?), json!({ "half_width": h, "n": n })))
}

fn run_stretch(s: &Setup<StretchParams>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let (g, grid_json) = square(&s.grid, 4.0, 512)?;
    let mut r = s.report(grid_json);
    let alpha = p.alpha;
    let m = alpha / (alpha + 2.0);
    let mu = Field::from_fn(&g, |z| {
        if z.norm() <= 1.0 && z.norm() > 0.0 {
            m * z / z.conj()
        } else {
            ZERO
        }
    });
    let prob = BeltramiProblem::new(mu)?;
    let sol = principal_solve(&prob, DEFAULT_TOL, DEFAULT_MAX_TERMS)?;
    let exact = Field::from_fn(&g, |z| if z.norm() <= 1.0 { z * z.norm().powf(alpha) } else { z });
    let [lo, hi] = p.excluded_annulus;
    let keep = |z: C64| z.norm() <= p.outer_radius && !(lo..=hi).contains(&z.norm());
    let err = lp_norm_where(&(&sol.w - &exact), 2.0, keep)? / lp_norm_where(&exact, 2.0, keep)?;
    r.scalar("stretch_relative_l2", err);
    r.flag(Flag::compare(
        "radial_stretch",
        "beltrami: mu = m z / conj(z) on the disc gives w = z |z|^alpha",
        err,
        Comparison::AtMost,
        s.tol.get("stretch_relative_l2"),
    ));

    let m_hat = beurling_norm_estimate_on(&g, 2.0, p.norm_trials, s.seed)?;
    let fitted = sol.fitted_ratio();
    let budget = s.tol.get("decay_factor") * prob.k() * m_hat;
    r.scalar("k", prob.k());
    r.scalar("beurling_norm_estimate", m_hat);
    r.scalar("fitted_ratio", fitted);
    r.scalar("terms", sol.series_residuals.len() as f64);
    r.flag(Flag::compare(
        "neumann_decay",
        "beltrami: Neumann-term norms decay geometrically with ratio <= k M",
        fitted,
        Comparison::AtMost,
        budget,
    ));
    r.scalar("beltrami_residual", sol.beltrami_residual);
    r.flag(Flag::compare(
        "beltrami_residual",
        "beltrami: w_zbar = mu w_z for the principal solution",
        sol.beltrami_residual,
        Comparison::AtMost,
        s.tol.get("beltrami_residual"),
    ));
    r.series("neumann_terms", sol.series_residuals.clone());
    let idx: Vec<f64> = (0..sol.series_residuals.len()).map(|k| k as f64).collect();
    r.table(Table::from_columns("neumann_terms", &[("term", &idx), ("norm", &sol.series_residuals)]));
    r.plot(Plot {
        name: "neumann_terms".into(),
        title: "Neumann-series term norms".into(),
        x_label: "term".into(),
        y_label: "L^2 norm".into(),
        log_x: false,
        log_y: true,
        lines: vec![("norm".into(), idx.iter().copied().zip(sol.series_residuals.iter().copied()).collect())],
    });
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsiParams {
    /// `mu_k = k * bump(z, center, radius)`.
    pub k_values: Vec<f64>,
    pub center: [f64; 2],
    pub radius: f64,
    /// Random trials for the `L^6` Beurling-norm proxy.
    pub norm_trials: usize,
}

impl Default for PsiParams {
    fn default() -> Self {
        Self {
            k_values: vec![0.2, 0.1, 0.05, 0.025],
            center: [0.1, 0.0],
            radius: 0.8,
            norm_trials: 4,
        }
    }
}

const PSI_TOLERANCES: &[(&str, f64)] = &[("final_over_initial", 0.2)];

fn validate_psi(p: &PsiParams, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n", "half_width"])?;
    if p.k_values.len() < 2 {
        return Err("need at least two k values".into());
    }
    if !decreasing_strictly(&p.k_values) || p.k_values.iter().any(|k| !(*k > 0.0 && *k < 1.0)) {
        return Err("k_values must decrease strictly inside (0, 1)".into());
    }
    if !(p.radius > 0.0) {
        return Err("radius must be positive".into());
    }
    Ok(())
}

pub fn prepare_psi(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, PSI_TOLERANCES, validate_psi, run_psi)
}

fn run_psi(s: &Setup<PsiParams>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let (g, grid_json) = square(&s.grid, 2.0, 256)?;
    let mut r = s.report(grid_json);
    let c = C64::new(p.center[0], p.center[1]);
    let mut psi = Vec::with_capacity(p.k_values.len());
    for &k in &p.k_values {
        let mu = Field::from_fn(&g, |z| C64::new(k * bump(z, c, p.radius), 0.0));
        let sol = principal_solve(&BeltramiProblem::new(mu)?, DEFAULT_TOL, DEFAULT_MAX_TERMS)?;
        psi.push(psi_deviation(&sol.w_z, &sol.w_zbar)?);
    }
    r.series("k", p.k_values.clone());
    r.series("psi_deviation", psi.clone());
    r.series("halving_ratios", psi.windows(2).map(|w| w[0] / w[1]).collect());
    r.flag(Flag::holds(
        "psi_strictly_decreasing",
        "beltrami: psi-deviation decreases monotonically as k decreases",
        decreasing_strictly(&psi),
    ));
    let ratio = psi[psi.len() - 1] / psi[0];
    r.scalar("final_over_initial", ratio);
    r.flag(Flag::compare(
        "psi_vanishes",
        "beltrami: psi-deviation tends to 0 as K -> 1",
        ratio,
        Comparison::AtMost,
        s.tol.get("final_over_initial"),
    ));
    // Contraction budget `k < 1 / (2 M_6)` for the largest k.
    let m6 = beurling_norm_estimate_on(&g, 6.0, p.norm_trials, s.seed)?;
    r.scalar("beurling_norm_estimate_l6", m6);
    r.scalar("l6_budget", 1.0 / (2.0 * m6));
    r.table(Table::from_columns("psi_deviation", &[("k", &p.k_values), ("psi", &psi)]));
    r.plot(Plot {
        name: "psi_deviation".into(),
        title: "psi-deviation of principal solutions".into(),
        x_label: "k".into(),
        y_label: "psi".into(),
        log_x: true,
        log_y: true,
        lines: vec![("psi".into(), p.k_values.iter().copied().zip(psi.iter().copied()).collect())],
    });
    Ok(r)
}
