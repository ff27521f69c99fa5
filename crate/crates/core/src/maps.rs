//! Closed-form maps: the radial stretch `w0(z) = z log^a(e / |z|^2)`, which is
//! quasiconformal with `Delta w0` in `L^2` but not Lipschitz, and a family of
//! near-identity test maps with prescribed dilatation, Laplacian and boundary
//! perturbation scales.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{QcError, Result};
use crate::greenpoisson::{solve_poisson, CircleFn};
use crate::grid::{gauss_legendre_on, gradient, lp_norm, DiscGrid, Field, Grid, C64};

/// Exponent of `w0`; admissible range `0 < a < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W0Params {
    a: f64,
}

impl W0Params {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 0.5) {
            return Err(QcError::Domain(format!("a = {a} outside (0, 1/2)")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `a / (1 - a)`, the bound on the dilatation of `w0`.
    pub fn dilatation_bound(&self) -> f64 {
        self.a / (1.0 - self.a)
    }
}

/// `L = log(e / |z|^2) = 1 - 2 log |z|`.
fn log_factor(z: C64) -> f64 {
    1.0 - 2.0 * z.norm().ln()
}

fn check_point(z: C64) -> Result<f64> {
    let r = z.norm();
    if r == 0.0 {
        return Err(QcError::SingularPoint);
    }
    if !r.is_finite() || r > 1.0 {
        return Err(QcError::Domain(format!("|z| = {r} outside the closed disc")));
    }
    Ok(log_factor(z))
}

pub fn w0_eval(z: C64, p: W0Params) -> C64 {
    if z.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    z * log_factor(z).powf(p.a)
}

/// `(w0)_z = L^(a-1) (L - a)`.
pub fn w0_dz(z: C64, p: W0Params) -> Result<C64> {
    let l = check_point(z)?;
    Ok(C64::new(l.powf(p.a - 1.0) * (l - p.a), 0.0))
}

/// `(w0)_zbar = -a (z / zbar) L^(a-1)`.
pub fn w0_dzbar(z: C64, p: W0Params) -> Result<C64> {
    let l = check_point(z)?;
    Ok(-p.a * (z / z.conj()) * l.powf(p.a - 1.0))
}

/// `Delta w0 = 4 d/dzbar (w0)_z = (4a / zbar) L^(a-2) ((a - 1) - L)`.
pub fn w0_laplacian(z: C64, p: W0Params) -> Result<C64> {
    let l = check_point(z)?;
    Ok(4.0 * p.a / z.conj() * l.powf(p.a - 2.0) * ((p.a - 1.0) - l))
}

/// `w0` and its closed-form derivatives sampled on a grid: `(w0, w_z, w_zbar, Delta w0)`.
pub fn w0_fields(
    grid: &Arc<DiscGrid>,
    p: W0Params,
) -> Result<[Field<DiscGrid>; 4]> {
    let n = grid.len();
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        let z = grid.point(i);
        out[0].push(w0_eval(z, p));
        out[1].push(w0_dz(z, p)?);
        out[2].push(w0_dzbar(z, p)?);
        out[3].push(w0_laplacian(z, p)?);
    }
    let [a, b, c, d] = out;
    Ok([
        Field::new(Arc::clone(grid), a)?,
        Field::new(Arc::clone(grid), b)?,
        Field::new(Arc::clone(grid), c)?,
        Field::new(Arc::clone(grid), d)?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct DilatationCheck {
    pub a: f64,
    pub sup_mu: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Nodewise `sup |(w0)_zbar / (w0)_z|` against `a / (1 - a)`.
pub fn w0_dilatation_check(p: W0Params, grid: &DiscGrid) -> Result<DilatationCheck> {
    let mut sup: f64 = 0.0;
    for i in 0..grid.len() {
        let z = grid.point(i);
        sup = sup.max(w0_dzbar(z, p)?.norm() / w0_dz(z, p)?.norm());
    }
    let bound = p.dilatation_bound();
    Ok(DilatationCheck {
        a: p.a,
        sup_mu: sup,
        bound,
        holds: sup <= bound + 1e-9,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzWitness {
    pub radii: Vec<f64>,
    /// `|w0(r)| / r = log^a(e / r^2)`.
    pub ratios: Vec<f64>,
    pub strictly_increasing: bool,
    /// Last ratio exceeds twice the first.
    pub divergent: bool,
}

/// Difference quotients of `w0` at the origin along decreasing radii.
pub fn w0_non_lipschitz_witness(p: W0Params, radii: &[f64]) -> Result<LipschitzWitness> {
    if radii.is_empty() {
        return Err(QcError::Configuration("empty radius list".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(QcError::Configuration("radii must be strictly decreasing".into()));
    }
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| {
            check_point(C64::new(r, 0.0))?;
            Ok(w0_eval(C64::new(r, 0.0), p).norm() / r)
        })
        .collect::<Result<_>>()?;
    Ok(LipschitzWitness {
        radii: radii.to_vec(),
        strictly_increasing: ratios.windows(2).all(|w| w[1] > w[0]),
        divergent: ratios[ratios.len() - 1] > 2.0 * ratios[0],
        ratios,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilitySeries {
    pub p: f64,
    pub cutoffs: Vec<f64>,
    /// `L^p` norm of `Delta w0` over `cutoff < |z| < 1`.
    pub norms: Vec<f64>,
    pub last_relative_change: f64,
    pub growth: f64,
    pub convergent: bool,
    pub divergent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    pub a: f64,
    pub series: Vec<IntegrabilitySeries>,
}

/// `L^p` norms of `Delta w0` on the annuli `10^(-4j) < |z| < 1`, `j = 1..=levels`.
///
/// The radial integral is done in `s = -log r` with composite Gauss-Legendre
/// (unit panels), which resolves the logarithmic factor uniformly in scale.
pub fn w0_laplacian_integrability(
    p: W0Params,
    p_list: &[f64],
    levels: usize,
) -> Result<IntegrabilityReport> {
    if levels < 2 {
        return Err(QcError::Configuration("need at least two cutoff levels".into()));
    }
    let cutoffs: Vec<f64> = (1..=levels).map(|j| 10f64.powi(-4 * j as i32)).collect();
    let series = p_list
        .iter()
        .map(|&q| {
            if !(q >= 1.0) {
                return Err(QcError::Domain(format!("L^p exponent {q} < 1")));
            }
            // |Delta w0|^q r dr = |Delta w0(e^-s)|^q e^(-2s) ds
            let integrand = |s: f64| {
                let z = C64::new((-s).exp(), 0.0);
                w0_laplacian(z, p).map(|v| v.norm().powf(q) * (-2.0 * s).exp())
            };
            let mut acc = 0.0;
            let mut s0 = 0.0;
            let mut norms = Vec::with_capacity(levels);
            for &eps in &cutoffs {
                let s1 = -eps.ln();
                let panels = (s1 - s0).ceil() as usize;
                let h = (s1 - s0) / panels as f64;
                for k in 0..panels {
                    let a = s0 + k as f64 * h;
                    let (xs, ws) = gauss_legendre_on(16, a, a + h);
                    for (x, w) in xs.iter().zip(&ws) {
                        acc += w * integrand(*x)?;
                    }
                }
                s0 = s1;
                norms.push((2.0 * PI * acc).powf(1.0 / q));
            }
            let n = norms.len();
            let last_relative_change = (norms[n - 1] - norms[n - 2]).abs() / norms[n - 1];
            let diffs: Vec<f64> = norms.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            let growth = norms[n - 1] / norms[0];
            Ok(IntegrabilitySeries {
                p: q,
                cutoffs: cutoffs.clone(),
                convergent: diffs.windows(2).all(|d| d[1] < d[0]) && last_relative_change < 0.02,
                divergent: growth >= 5.0,
                norms,
                last_relative_change,
                growth,
            })
        })
        .collect::<Result<_>>()?;
    Ok(IntegrabilityReport { a: p.a, series })
}

/// Scales of a near-identity test map: affine shear `k`, Laplacian size `t`
/// (in `L^p`) and boundary perturbation `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFamily {
    pub k: f64,
    pub t: f64,
    pub eps: f64,
    pub p: f64,
}

impl TestFamily {
    /// Member `n` of the dyadic family: all three scales equal `2^-n`.
    pub fn dyadic(n: u32, p: f64) -> Self {
        let s = 0.5f64.powi(n as i32);
        Self {
            k: s,
            t: s,
            eps: s,
            p,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub w: Field<DiscGrid>,
    pub w_z: Field<DiscGrid>,
    pub w_zbar: Field<DiscGrid>,
    pub laplacian: Field<DiscGrid>,
    /// Image of the unit circle under the map.
    pub boundary: CircleFn,
    /// `sup (1 + |mu|) / (1 - |mu|)` over the nodes.
    pub k_measured: f64,
    pub laplacian_lp: f64,
    pub min_jacobian: f64,
}

/// Fixed smooth source shape of the family.
fn source_shape(z: C64) -> C64 {
    C64::new(1.0 - z.norm_sqr(), 0.0) + 0.5 * z
}

/// Builds `w = S(v)`, `S(w) = w + k conj(w)`, where `v` solves `Delta v = g`,
/// `||g||_p = t`, with boundary values `e^{i theta} + eps (e^{3 i theta} + e^{-i theta}) / 8`.
pub fn make_test_family(params: TestFamily, grid: &Arc<DiscGrid>) -> Result<FamilyMember> {
    let TestFamily { k, t, eps, p } = params;
    if !(0.0..1.0).contains(&k) || t < 0.0 || eps < 0.0 || !(p >= 1.0) {
        return Err(QcError::Domain(format!("invalid family scales {params:?}")));
    }
    let nt = grid.n_theta();
    let b = CircleFn::from_fn(nt, |th| {
        C64::from_polar(1.0, th)
            + eps / 8.0 * (C64::from_polar(1.0, 3.0 * th) + C64::from_polar(1.0, -th))
    })?;
    let shape = Field::from_fn(grid, source_shape);
    let g = if t > 0.0 {
        let norm = lp_norm(&shape, p)?;
        &shape * (t / norm)
    } else {
        Field::zeros(grid)
    };
    let v = solve_poisson(&b, &g)?;
    let shear = |c: C64| c + k * c.conj();
    let w = v.map(shear);
    let laplacian = g.map(shear);
    let (vz, vzb) = gradient(&v)?;
    // (S o v)_z = v_z + k conj(v_zbar), (S o v)_zbar = v_zbar + k conj(v_z)
    let w_z = vz.zip_with(&vzb, |a, b| a + k * b.conj());
    let w_zbar = vzb.zip_with(&vz, |a, b| a + k * b.conj());
    let mut min_jacobian = f64::INFINITY;
    let mut k_measured: f64 = 1.0;
    for (a, b) in w_z.values().iter().zip(w_zbar.values()) {
        let jac = a.norm_sqr() - b.norm_sqr();
        min_jacobian = min_jacobian.min(jac);
        let mu = b.norm() / a.norm();
        k_measured = k_measured.max((1.0 + mu) / (1.0 - mu));
    }
    if !(min_jacobian > 0.0) {
        return Err(QcError::FamilyTooLarge);
    }
    let boundary = CircleFn::new(b.samples().iter().map(|c| shear(*c)).collect())?;
    let laplacian_lp = lp_norm(&laplacian, p)?;
    Ok(FamilyMember {
        w,
        w_z,
        w_zbar,
        laplacian,
        boundary,
        k_measured,
        laplacian_lp,
        min_jacobian,
    })
}
