use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::composite::{
    composition_split, inverse_laplacian_at, inverse_laplacian_field, invert_newton,
    laplacian_of_composition, ClosedForm, DiffeoData, Jet, MapData,
};
use qclab::grid::{laplacian_fd, lp_norm_where};
use qclab::maps::{w0_dz, w0_dzbar, w0_eval, w0_laplacian, W0Params};
use qclab::{DiscGrid, Field, Grid, C64};

use super::{job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Cell, Comparison, ExperimentReport, Flag, Table};
use crate::CliError;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Exponent of the `w0` inner map.
    pub a: f64,
    /// Outer map `z + eps conj(z)^2`.
    pub eps: f64,
    /// Inner shear `z + shear conj(z)`.
    pub shear: f64,
    /// Conformal map `z + conformal z^2`.
    pub conformal: f64,
    /// Annulus avoiding the singularity of `w0` at the origin.
    pub w0_annulus: [f64; 2],
    /// Grid `[n_r, n_theta]` for the numerically inverted map.
    pub inverse_grid: [usize; 2],
}

impl Default for Params {
    fn default() -> Self {
        Self {
            a: 0.25,
            eps: 0.05,
            shear: 0.1,
            conformal: 0.05,
            w0_annulus: [0.2, 0.8],
            inverse_grid: [96, 128],
        }
    }
}

const TOLERANCES: &[(&str, f64)] = &[
    ("real_outer_relative_l2", 1e-2),
    ("complex_outer_relative_l2", 1e-2),
    ("conformal_inverse", 1e-6),
    ("inverse_relative_l2", 5e-2),
];

fn validate(p: &Params, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n_r", "n_theta"])?;
    let [lo, hi] = p.w0_annulus;
    if !(0.0 < lo && lo < hi && hi <= 1.0) {
        return Err("w0_annulus must satisfy 0 < lo < hi <= 1".into());
    }
    if !(p.eps.abs() < 0.25 && p.shear.abs() < 1.0 && p.conformal.abs() < 0.5) {
        return Err("eps, shear or conformal too large for a diffeomorphism of the disc".into());
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

/// `H(zeta) = 1 - |zeta|^2`.
fn radial_quadratic(z: C64) -> Jet {
    Jet {
        v: C64::new(1.0 - z.norm_sqr(), 0.0),
        z: -z.conj(),
        zb: -z,
        zz: ZERO,
        zzb: C64::new(-1.0, 0.0),
        zbzb: ZERO,
    }
}

/// `z + e conj(z)^2`.
fn conj_square(e: f64) -> impl Fn(C64) -> Jet + Copy {
    move |z| Jet {
        v: z + e * z.conj() * z.conj(),
        z: C64::new(1.0, 0.0),
        zb: 2.0 * e * z.conj(),
        zz: ZERO,
        zzb: ZERO,
        zbzb: C64::new(2.0 * e, 0.0),
    }
}

/// `z + e |z|^2`; its `Psi_zzbar != 0` exercises every term of the inverse formula.
fn radial_bend(e: f64) -> impl Fn(C64) -> Jet + Copy {
    move |z| Jet {
        v: z + e * z.norm_sqr(),
        z: 1.0 + e * z.conj(),
        zb: e * z,
        zz: ZERO,
        zzb: C64::new(e, 0.0),
        zbzb: ZERO,
    }
}

fn w0_jet(a: W0Params) -> impl Fn(C64) -> Jet {
    move |z| {
        let (dz, dzb, lap) = match (w0_dz(z, a), w0_dzbar(z, a), w0_laplacian(z, a)) {
            (Ok(x), Ok(y), Ok(l)) => (x, y, l),
            // The origin: the jet is undefined there; the annulus masks it out.
            _ => (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0)),
        };
        Jet {
            v: w0_eval(z, a),
            z: dz,
            zb: dzb,
            zz: ZERO,
            zzb: lap / 4.0,
            zbzb: ZERO,
        }
    }
}

fn annulus_rel_err(a: &Field<DiscGrid>, b: &Field<DiscGrid>, lo: f64, hi: f64) -> qclab::Result<f64> {
    let keep = |z: C64| (lo..=hi).contains(&z.norm());
    Ok(lp_norm_where(&(a - b), 2.0, keep)? / lp_norm_where(b, 2.0, keep)?)
}

fn run(s: &Setup<Params>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let n_r = s.grid.n_r.unwrap_or(128);
    let n_theta = s.grid.n_theta.unwrap_or(256);
    let mut r = s.report(json!({ "n_r": n_r, "n_theta": n_theta }));
    let g = Arc::new(DiscGrid::new(n_r, n_theta)?);
    let w0 = W0Params::new(p.a)?;
    let [lo, hi] = p.w0_annulus;
    let mut t = Table::new("identities", &["identity", "inner", "outer", "relative_error"]);

    // Real outer function composed with w0.
    let inner_w0 = MapData::from_fn(&g, w0_jet(w0));
    let analytic = laplacian_of_composition(&ClosedForm(radial_quadratic), &inner_w0).field;
    let fd = laplacian_fd(&inner_w0.w.map(|v| C64::new(1.0 - v.norm_sqr(), 0.0)))?;
    let real_err = annulus_rel_err(&analytic, &fd, lo, hi)?;
    t.push(vec!["real_outer".into(), "w0".into(), "1 - |z|^2".into(), real_err.into()]);
    r.scalar("real_outer_error", real_err);
    r.flag(Flag::compare(
        "real_outer_laplacian",
        "composite: Laplacian of H o w agrees with finite differences",
        real_err,
        Comparison::AtMost,
        s.tol.get("real_outer_relative_l2"),
    ));

    // Complex outer map: shear inner map on the whole disc, w0 on the annulus.
    let phi = conj_square(p.eps);
    let shear = p.shear;
    let inner_shear = MapData::from_fn(&g, |z| Jet {
        v: z + shear * z.conj(),
        zb: C64::new(shear, 0.0),
        ..Jet::identity(z)
    });
    let mut complex_err: f64 = 0.0;
    for (name, inner, (a, b)) in [("shear", &inner_shear, (0.0, 1.0)), ("w0", &inner_w0, (lo, hi))] {
        let total = composition_split(&ClosedForm(phi), inner).total();
        let fd = laplacian_fd(&inner.w.map(|v| phi(v).v))?;
        let e = annulus_rel_err(&total, &fd, a, b)?;
        t.push(vec!["complex_split".into(), name.into(), "z + eps conj(z)^2".into(), e.into()]);
        r.scalar(&format!("complex_outer_error_{name}"), e);
        complex_err = complex_err.max(e);
    }
    r.flag(Flag::compare(
        "complex_outer_split",
        "composite: S1 + S2 + S3 equals the Laplacian of Phi o w",
        complex_err,
        Comparison::AtMost,
        s.tol.get("complex_outer_relative_l2"),
    ));

    // Conformal maps have harmonic inverses: A = 0.
    let c = p.conformal;
    let conformal = DiffeoData::from_fn(&g, |z| Jet {
        v: z + c * z * z,
        z: 1.0 + 2.0 * c * z,
        zb: ZERO,
        zz: C64::new(2.0 * c, 0.0),
        zzb: ZERO,
        zbzb: ZERO,
    });
    let a_max = inverse_laplacian_field(&conformal)?.max_abs();
    t.push(vec!["conformal_inverse".into(), "-".into(), "z + c z^2".into(), Cell::Num(a_max)]);
    r.scalar("conformal_inverse_max", a_max);
    r.flag(Flag::compare(
        "conformal_inverse_harmonic",
        "composite: the inverse of a conformal map is harmonic (A = 0)",
        a_max,
        Comparison::AtMost,
        s.tol.get("conformal_inverse"),
    ));

    // Inverse Laplacian against a numerically inverted map.
    let gi = Arc::new(DiscGrid::new(p.inverse_grid[0], p.inverse_grid[1])?);
    let mut inv_err: f64 = 0.0;
    for (name, psi) in [
        ("conj_square", Box::new(conj_square(p.eps)) as Box<dyn Fn(C64) -> Jet>),
        ("radial_bend", Box::new(radial_bend(p.eps))),
    ] {
        let phi_vals = (0..gi.len())
            .map(|i| {
                let zeta = gi.point(i);
                invert_newton(&psi, zeta, zeta)
            })
            .collect::<qclab::Result<Vec<_>>>()?;
        let phi_field = Field::new(Arc::clone(&gi), phi_vals)?;
        let fd = laplacian_fd(&phi_field)?;
        let a_of_phi = Field::new(
            Arc::clone(&gi),
            phi_field
                .values()
                .iter()
                .map(|z| inverse_laplacian_at(&psi(*z)))
                .collect::<qclab::Result<Vec<_>>>()?,
        )?;
        let e = annulus_rel_err(&a_of_phi, &fd, 0.0, 0.5)?;
        t.push(vec!["inverse_laplacian".into(), name.into(), "-".into(), e.into()]);
        r.scalar(&format!("inverse_error_{name}"), e);
        inv_err = inv_err.max(e);
    }
    r.flag(Flag::compare(
        "inverse_laplacian",
        "composite: Delta Phi = A o Phi for Phi the inverse of Psi",
        inv_err,
        Comparison::AtMost,
        s.tol.get("inverse_relative_l2"),
    ));
    r.table(t);
    Ok(r)
}
