use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::greenpoisson::{green_kernel_gradient_bound_check, solve_poisson, CircleFn};
use qclab::{DiscGrid, Field, Grid, C64};

use super::{job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Comparison, ExperimentReport, Flag, Plot, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Number of random `(z, w)` pairs for the gradient bound.
    pub pairs: usize,
    /// Pairs are drawn from the disc of this radius.
    pub max_radius: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            pairs: 1000,
            max_radius: 0.999,
        }
    }
}

const TOLERANCES: &[(&str, f64)] = &[("constant_source_error", 1e-3), ("gradient_bound_slack", 1e-12)];

fn validate(p: &Params, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n_r", "n_theta"])?;
    if p.pairs == 0 {
        return Err("pairs must be positive".into());
    }
    if !(p.max_radius > 0.0 && p.max_radius < 1.0) {
        return Err("max_radius must lie in (0, 1)".into());
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

/// Uniform point in the disc of radius `rmax`.
fn disc_point(rng: &mut ChaCha8Rng, rmax: f64) -> C64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    C64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Seeded pairs of distinct points of the disc.
pub fn random_pairs(seed: u64, count: usize, rmax: f64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let (z, w) = (disc_point(&mut rng, rmax), disc_point(&mut rng, rmax));
        if (z - w).norm() > 1e-9 {
            pairs.push((z, w));
        }
    }
    pairs
}

fn run(s: &Setup<Params>) -> qclab::Result<ExperimentReport> {
    let n_r = s.grid.n_r.unwrap_or(128);
    let n_theta = s.grid.n_theta.unwrap_or(256);
    let mut r = s.report(json!({ "n_r": n_r, "n_theta": n_theta }));
    let g = Arc::new(DiscGrid::new(n_r, n_theta)?);

    // Delta v = 4, v = 0 on the circle: v = |z|^2 - 1.
    let zero = CircleFn::new(vec![C64::new(0.0, 0.0); n_theta])?;
    let v = solve_poisson(&zero, &Field::constant(&g, C64::new(4.0, 0.0)))?;
    let mut ring_err = vec![0.0f64; n_r];
    for ir in 0..n_r {
        for jt in 0..n_theta {
            let i = g.index(ir, jt);
            let exact = g.point(i).norm_sqr() - 1.0;
            ring_err[ir] = ring_err[ir].max((v.values()[i] - exact).norm());
        }
    }
    let max_err = ring_err.iter().cloned().fold(0.0, f64::max);
    r.scalar("constant_source_max_error", max_err);
    r.flag(Flag::compare(
        "constant_source",
        "greenpoisson: Delta v = 4 with zero boundary gives |z|^2 - 1",
        max_err,
        Comparison::AtMost,
        s.tol.get("constant_source_error"),
    ));
    r.table(Table::from_columns("constant_source_error", &[("r", g.radii()), ("max_error", &ring_err)]));
    r.plot(Plot {
        name: "constant_source_error".into(),
        title: "Ring-wise error of the constant-source solution".into(),
        x_label: "r".into(),
        y_label: "max |v - (|z|^2 - 1)|".into(),
        log_x: false,
        log_y: true,
        lines: vec![("error".into(), g.radii().iter().copied().zip(ring_err.iter().copied()).collect())],
    });

    let pairs = random_pairs(s.seed, s.params.pairs, s.params.max_radius);
    let rep = green_kernel_gradient_bound_check(&pairs)?;
    r.scalar("gradient_max_ratio", rep.max_ratio);
    r.scalar("gradient_violations", rep.violations as f64);
    r.flag(Flag::compare(
        "gradient_bound",
        "greenpoisson: |grad_z G(z, w)| <= 1 / (pi |z - w|)",
        rep.max_ratio,
        Comparison::AtMost,
        1.0 + s.tol.get("gradient_bound_slack"),
    ));
    Ok(r)
}
