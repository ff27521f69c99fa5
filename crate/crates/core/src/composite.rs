//! Laplacians of compositions and of inverse maps, and the exponent recursion
//! used to bootstrap integrability of the gradient.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{QcError, Result};
use crate::grid::{gradient, Field, Grid, SquareGrid, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Value and Wirtinger derivatives up to order two at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub z: C64,
    pub zb: C64,
    pub zz: C64,
    pub zzb: C64,
    pub zbzb: C64,
}

impl Jet {
    pub fn laplacian(&self) -> C64 {
        4.0 * self.zzb
    }

    pub fn jacobian(&self) -> f64 {
        self.z.norm_sqr() - self.zb.norm_sqr()
    }

    /// `|D^2 f| = |f_zz| + 2 |f_zzbar| + |f_zbarzbar|`.
    pub fn second_norm(&self) -> f64 {
        self.zz.norm() + 2.0 * self.zzb.norm() + self.zbzb.norm()
    }

    pub fn identity(z: C64) -> Self {
        Self {
            v: z,
            z: C64::new(1.0, 0.0),
            zb: ZERO,
            zz: ZERO,
            zzb: ZERO,
            zbzb: ZERO,
        }
    }
}

/// Anything that can report a [`Jet`] at a point (`None` outside its domain).
pub trait JetSource {
    fn jet(&self, z: C64) -> Option<Jet>;
}

/// Closed-form jet.
pub struct ClosedForm<F>(pub F);

impl<F: Fn(C64) -> Jet> JetSource for ClosedForm<F> {
    fn jet(&self, z: C64) -> Option<Jet> {
        Some((self.0)(z))
    }
}

/// Jets from samples on a square grid: fourth-order central differences,
/// then bicubic interpolation of every derivative layer.
pub struct SampledJet {
    grid: Arc<SquareGrid>,
    layers: [Vec<C64>; 6],
    valid_half_width: f64,
}

impl SampledJet {
    pub fn new(f: &Field<SquareGrid>) -> Self {
        let grid = Arc::clone(f.grid());
        let n = grid.n();
        let h = grid.spacing();
        let v = f.values();
        let at = |i: usize, j: usize| v[i * n + j];
        let nan = C64::new(f64::NAN, f64::NAN);
        let mut layers: [Vec<C64>; 6] = std::array::from_fn(|_| vec![nan; n * n]);
        layers[0] = v.to_vec();
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for i in 2..n - 2 {
            for j in 2..n - 2 {
                let (mut fx, mut fy, mut fxx, mut fyy, mut fxy) = (ZERO, ZERO, ZERO, ZERO, ZERO);
                for s in 0..5 {
                    fx += at(i, j + s - 2) * d1[s];
                    fy += at(i + s - 2, j) * d1[s];
                    fxx += at(i, j + s - 2) * d2[s];
                    fyy += at(i + s - 2, j) * d2[s];
                    for t in 0..5 {
                        fxy += at(i + s - 2, j + t - 2) * (d1[s] * d1[t]);
                    }
                }
                let (fx, fy) = (fx / h, fy / h);
                let (fxx, fyy, fxy) = (fxx / (h * h), fyy / (h * h), fxy / (h * h));
                let ii = C64::new(0.0, 1.0);
                let idx = i * n + j;
                layers[1][idx] = 0.5 * (fx - ii * fy);
                layers[2][idx] = 0.5 * (fx + ii * fy);
                layers[3][idx] = 0.25 * (fxx - fyy - 2.0 * ii * fxy);
                layers[4][idx] = 0.25 * (fxx + fyy);
                layers[5][idx] = 0.25 * (fxx - fyy + 2.0 * ii * fxy);
            }
        }
        // Interpolation stencils near z need finite layers: keep 4 nodes clear.
        let valid_half_width = grid.half_width() - 4.0 * h;
        Self {
            grid,
            layers,
            valid_half_width,
        }
    }
}

impl JetSource for SampledJet {
    fn jet(&self, z: C64) -> Option<Jet> {
        if z.re.abs() > self.valid_half_width || z.im.abs() > self.valid_half_width {
            return None;
        }
        let mut out = [ZERO; 6];
        for (o, layer) in out.iter_mut().zip(&self.layers) {
            *o = self.grid.interpolate(layer, z)?;
        }
        if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return None;
        }
        Some(Jet {
            v: out[0],
            z: out[1],
            zb: out[2],
            zz: out[3],
            zzb: out[4],
            zbzb: out[5],
        })
    }
}

/// Inner map data on some grid: `w`, `w_z`, `w_zbar`, `Delta w`.
#[derive(Debug, Clone)]
pub struct MapData<G> {
    pub w: Field<G>,
    pub w_z: Field<G>,
    pub w_zbar: Field<G>,
    pub laplacian: Field<G>,
}

impl<G: Grid> MapData<G> {
    pub fn from_fn(grid: &Arc<G>, f: impl Fn(C64) -> Jet) -> Self {
        let jets: Vec<Jet> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        let field = |g: &dyn Fn(&Jet) -> C64| {
            Field::new(Arc::clone(grid), jets.iter().map(g).collect()).expect("grid length")
        };
        Self {
            w: field(&|j| j.v),
            w_z: field(&|j| j.z),
            w_zbar: field(&|j| j.zb),
            laplacian: field(&|j| j.laplacian()),
        }
    }
}

/// Nodewise field with a validity mask (invalid nodes hold 0).
#[derive(Debug, Clone)]
pub struct MaskedField<G> {
    pub field: Field<G>,
    pub valid: Vec<bool>,
}

impl<G> MaskedField<G> {
    pub fn invalid_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

fn outer_jets<G: Grid>(outer: &impl JetSource, w: &MapData<G>) -> Vec<Option<Jet>> {
    w.w.values().iter().map(|z| outer.jet(*z)).collect()
}

/// `Delta (H o w)` for real-valued `H`:
/// `(Delta H)(w) (|w_z|^2 + |w_zbar|^2) + 2 Re(4 H_zz(w) w_z w_zbar + H_z(w) Delta w)`.
pub fn laplacian_of_composition<G: Grid>(h: &impl JetSource, w: &MapData<G>) -> MaskedField<G> {
    let jets = outer_jets(h, w);
    let mut valid = Vec::with_capacity(jets.len());
    let mut values = Vec::with_capacity(jets.len());
    for (i, j) in jets.iter().enumerate() {
        let (a, b, l) = (w.w_z.values()[i], w.w_zbar.values()[i], w.laplacian.values()[i]);
        match j {
            Some(j) => {
                let s = j.laplacian().re * (a.norm_sqr() + b.norm_sqr())
                    + 2.0 * (4.0 * j.zz * a * b + j.z * l).re;
                values.push(C64::new(s, 0.0));
                valid.push(true);
            }
            None => {
                values.push(ZERO);
                valid.push(false);
            }
        }
    }
    MaskedField {
        field: Field::new(Arc::clone(w.w.grid()), values).expect("grid length"),
        valid,
    }
}

/// The three terms of `Delta (Phi o w)` for complex-valued `Phi`.
#[derive(Debug, Clone)]
pub struct CompositionSplit<G> {
    /// `(Delta Phi)(w) (|w_z|^2 + |w_zbar|^2)`
    pub s1: Field<G>,
    /// `4 (Phi_zz(w) w_z w_zbar + Phi_zbarzbar(w) conj(w_z w_zbar))`
    pub s2: Field<G>,
    /// `Phi_z(w) Delta w + Phi_zbar(w) conj(Delta w)`
    pub s3: Field<G>,
    pub valid: Vec<bool>,
}

impl<G: Grid> CompositionSplit<G> {
    pub fn total(&self) -> Field<G> {
        &(&self.s1 + &self.s2) + &self.s3
    }
}

pub fn composition_split<G: Grid>(phi: &impl JetSource, w: &MapData<G>) -> CompositionSplit<G> {
    let jets = outer_jets(phi, w);
    let n = jets.len();
    let (mut s1, mut s2, mut s3) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let mut valid = Vec::with_capacity(n);
    for (i, j) in jets.iter().enumerate() {
        let (a, b, l) = (w.w_z.values()[i], w.w_zbar.values()[i], w.laplacian.values()[i]);
        match j {
            Some(j) => {
                s1.push(j.laplacian() * (a.norm_sqr() + b.norm_sqr()));
                s2.push(4.0 * (j.zz * a * b + j.zbzb * (a * b).conj()));
                s3.push(j.z * l + j.zb * l.conj());
                valid.push(true);
            }
            None => {
                s1.push(ZERO);
                s2.push(ZERO);
                s3.push(ZERO);
                valid.push(false);
            }
        }
    }
    let grid = w.w.grid();
    let mk = |v| Field::new(Arc::clone(grid), v).expect("grid length");
    CompositionSplit {
        s1: mk(s1),
        s2: mk(s2),
        s3: mk(s3),
        valid,
    }
}

/// Map with first and second Wirtinger derivatives sampled on a grid.
#[derive(Debug, Clone)]
pub struct DiffeoData<G> {
    pub jets: Vec<Jet>,
    pub grid: Arc<G>,
}

impl<G: Grid> DiffeoData<G> {
    pub fn from_fn(grid: &Arc<G>, f: impl Fn(C64) -> Jet) -> Self {
        Self {
            jets: (0..grid.len()).map(|i| f(grid.point(i))).collect(),
            grid: Arc::clone(grid),
        }
    }

    pub fn jacobian(&self) -> Field<G> {
        Field::new(
            Arc::clone(&self.grid),
            self.jets.iter().map(|j| C64::new(j.jacobian(), 0.0)).collect(),
        )
        .expect("grid length")
    }
}

impl DiffeoData<crate::grid::DiscGrid> {
    /// Derivatives by the grid differentiation operators (applied twice).
    pub fn from_field(psi: &Field<crate::grid::DiscGrid>) -> Result<Self> {
        let (pz, pzb) = gradient(psi)?;
        let (pzz, pzzb) = gradient(&pz)?;
        let (_, pzbzb) = gradient(&pzb)?;
        let jets = (0..psi.values().len())
            .map(|i| Jet {
                v: psi.values()[i],
                z: pz.values()[i],
                zb: pzb.values()[i],
                zz: pzz.values()[i],
                zzb: pzzb.values()[i],
                zbzb: pzbzb.values()[i],
            })
            .collect();
        Ok(Self {
            jets,
            grid: Arc::clone(psi.grid()),
        })
    }
}

/// `Delta Phi` at `Psi(z)`, `Phi = Psi^{-1}`, from the jet of `Psi` at `z`:
/// `(4/J^3) [-Psi_zbar (conj(Psi_zzbar) J - conj(Psi_z) J_z)
///          + Psi_z (conj(Psi_zz) J - conj(Psi_z) J_zbar)]`.
pub fn inverse_laplacian_at(j: &Jet) -> Result<C64> {
    let jac = j.jacobian();
    if !(jac > 0.0) {
        return Err(QcError::NotDiffeomorphism);
    }
    let jz = j.zz * j.z.conj() + j.z * j.zzb.conj() - j.zzb * j.zb.conj() - j.zb * j.zbzb.conj();
    // conj(Psi_zz) J - conj(Psi_z) J_zbar with the |Psi_z|^2 terms cancelled by
    // hand, so every remaining term carries Psi_zbar, Psi_zzbar or Psi_zbarzbar
    // and conformal maps give exactly 0.
    let second = -j.zz.conj() * j.zb.norm_sqr()
        - j.z.conj() * (j.zzb * j.z.conj() - j.zbzb * j.zb.conj() - j.zb * j.zzb.conj());
    let bracket = -j.zb * (j.zzb.conj() * jac - j.z.conj() * jz) + j.z * second;
    Ok(4.0 / (jac * jac * jac) * bracket)
}

/// The field `A` with `Delta Phi = A o Phi`, evaluated on the grid of `Psi`.
pub fn inverse_laplacian_field<G: Grid>(psi: &DiffeoData<G>) -> Result<Field<G>> {
    let values = psi
        .jets
        .iter()
        .map(inverse_laplacian_at)
        .collect::<Result<Vec<_>>>()?;
    Field::new(Arc::clone(&psi.grid), values)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseBoundReport {
    /// `sup |Psi_zbar / Psi_z|`.
    pub k: f64,
    /// `max |A| / (k |D^2 Psi| + |Delta Psi| + 1e-12)`.
    pub max_ratio: f64,
    pub max_a: f64,
}

/// Empirical constant in `|A| <= C (k |D^2 Psi| + |Delta Psi|)`.
pub fn inverse_laplacian_bound_check<G: Grid>(psi: &DiffeoData<G>) -> Result<InverseBoundReport> {
    let a = inverse_laplacian_field(psi)?;
    let k = psi
        .jets
        .iter()
        .map(|j| j.zb.norm() / j.z.norm())
        .fold(0.0, f64::max);
    let mut max_ratio: f64 = 0.0;
    for (j, av) in psi.jets.iter().zip(a.values()) {
        let denom = k * j.second_norm() + j.laplacian().norm() + 1e-12;
        max_ratio = max_ratio.max(av.norm() / denom);
    }
    Ok(InverseBoundReport {
        k,
        max_ratio,
        max_a: a.max_abs(),
    })
}

/// Solves `Psi(z) = zeta` by Newton's method from `guess`.
pub fn invert_newton(psi: impl Fn(C64) -> Jet, zeta: C64, guess: C64) -> Result<C64> {
    let mut z = guess;
    for _ in 0..60 {
        let j = psi(z);
        let r = zeta - j.v;
        if r.norm() <= 1e-15 * (1.0 + zeta.norm()) {
            return Ok(z);
        }
        let jac = j.jacobian();
        if !(jac > 0.0) {
            return Err(QcError::NotDiffeomorphism);
        }
        // Psi_z d + Psi_zbar conj(d) = r
        z += (j.z.conj() * r - j.zb * r.conj()) / jac;
    }
    let r = (zeta - psi(z).v).norm();
    if r <= 1e-12 * (1.0 + zeta.norm()) {
        Ok(z)
    } else {
        Err(QcError::NotDiffeomorphism)
    }
}

/// Exponent recursion `q_{k+1} = 2 q_k / (4 - q_k)` run until `q > 4`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentLedger {
    pub q0: f64,
    pub sequence: Vec<f64>,
    /// First index with `q_k > 4`.
    pub k0: usize,
    /// Largest deviation from `1 - 2/q_{k+1} = 2 (1 - 2/q_k)`.
    pub doubling_drift: f64,
}

/// `2^n / (2^(n-1) - 1)`, `n = 3..=64`: starting values that land exactly on 4.
pub fn excluded_exponents() -> impl Iterator<Item = f64> {
    (3..=64).map(|n: i32| 2f64.powi(n) / (2f64.powi(n - 1) - 1.0))
}

pub fn bootstrap_exponents(q0: f64) -> Result<ExponentLedger> {
    if !(q0 > 2.0 && q0 < 4.0) {
        return Err(QcError::Domain(format!("q0 = {q0} outside (2, 4)")));
    }
    if excluded_exponents().any(|e| (q0 - e).abs() <= 1e-12) {
        return Err(QcError::DegenerateExponent);
    }
    let mut sequence = vec![q0];
    let mut drift: f64 = 0.0;
    let mut q = q0;
    while q <= 4.0 {
        let next = 2.0 * q / (4.0 - q);
        drift = drift.max(((1.0 - 2.0 / next) - 2.0 * (1.0 - 2.0 / q)).abs());
        sequence.push(next);
        q = next;
        if sequence.len() > 80 {
            return Err(QcError::DegenerateExponent);
        }
    }
    if drift > 1e-12 {
        return Err(QcError::Domain(format!("doubling identity drift {drift:e}")));
    }
    Ok(ExponentLedger {
        q0,
        k0: sequence.len() - 1,
        sequence,
        doubling_drift: drift,
    })
}

/// `K + (c_p K / 2) psi + (c_p (K + 4) / 2) t`.
pub fn lipschitz_bound_formula(k: f64, t: f64, c_p: f64, psi_of_k: f64) -> Result<f64> {
    if !(k >= 1.0) || !(t >= 0.0) || !(c_p > 0.0) || !(psi_of_k >= 0.0) {
        return Err(QcError::Domain(format!(
            "need K >= 1, t >= 0, c_p > 0, psi >= 0 (got {k}, {t}, {c_p}, {psi_of_k})"
        )));
    }
    Ok(k + 0.5 * c_p * k * psi_of_k + 0.5 * c_p * (k + 4.0) * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_fd, lp_norm, lp_norm_where, DiscGrid};
    use crate::maps::{w0_dz, w0_dzbar, w0_eval, w0_laplacian, W0Params};

    fn disc(nr: usize, nt: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(nr, nt).unwrap())
    }

    /// `H(zeta) = c + s |zeta|^2`.
    fn radial_quadratic(c: f64, s: f64) -> impl Fn(C64) -> Jet {
        move |z| Jet {
            v: C64::new(c + s * z.norm_sqr(), 0.0),
            z: s * z.conj(),
            zb: s * z,
            zz: ZERO,
            zzb: C64::new(s, 0.0),
            zbzb: ZERO,
        }
    }

    /// `Psi(z) = z + e conj(z)^2`.
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

    fn w0_jet(a: W0Params) -> impl Fn(C64) -> Jet {
        move |z| Jet {
            v: w0_eval(z, a),
            z: w0_dz(z, a).unwrap(),
            zb: w0_dzbar(z, a).unwrap(),
            zz: ZERO,
            zzb: w0_laplacian(z, a).unwrap() / 4.0,
            zbzb: ZERO,
        }
    }

    fn annulus_rel_err(a: &Field<DiscGrid>, b: &Field<DiscGrid>, lo: f64, hi: f64) -> f64 {
        let keep = |z: C64| (lo..=hi).contains(&z.norm());
        lp_norm_where(&(a - b), 2.0, keep).unwrap() / lp_norm_where(b, 2.0, keep).unwrap()
    }

    #[test]
    fn composition_with_identity() {
        let g = disc(16, 16);
        let id = MapData::from_fn(&g, Jet::identity);
        let l = laplacian_of_composition(&ClosedForm(radial_quadratic(0.0, 1.0)), &id);
        assert!(l.field.values().iter().all(|v| (v - 4.0).norm() < 1e-14));
        let l = laplacian_of_composition(&ClosedForm(radial_quadratic(1.0, -1.0)), &id);
        assert!(l.field.values().iter().all(|v| (v + 4.0).norm() < 1e-14));
    }

    #[test]
    fn composition_with_w0_matches_fd() {
        let g = disc(128, 256);
        let a = W0Params::new(0.25).unwrap();
        let w = MapData::from_fn(&g, w0_jet(a));
        let l = laplacian_of_composition(&ClosedForm(radial_quadratic(1.0, -1.0)), &w);
        let composed = w.w.map(|v| C64::new(1.0 - v.norm_sqr(), 0.0));
        let fd = laplacian_fd(&composed).unwrap();
        assert!(annulus_rel_err(&l.field, &fd, 0.2, 0.8) <= 1e-3);
    }

    #[test]
    fn sampled_outer_function_matches_closed_form() {
        let sq = Arc::new(SquareGrid::new(2.0, 256).unwrap());
        let h = |z: C64| C64::new((z.re * 1.3).sin() * (0.7 * z.im).cosh() + z.norm_sqr(), 0.0);
        let sampled = SampledJet::new(&Field::from_fn(&sq, h));
        let g = disc(64, 128);
        let w = MapData::from_fn(&g, |z| {
            let s = conj_square(0.05)(z);
            Jet { v: s.v + 0.1 * z.conj(), zb: s.zb + 0.1, ..s }
        });
        let l = laplacian_of_composition(&sampled, &w);
        assert_eq!(l.invalid_count(), 0);
        let composed = w.w.map(h);
        let fd = laplacian_fd(&composed).unwrap();
        assert!(annulus_rel_err(&l.field, &fd, 0.0, 0.9) <= 1e-2);
        assert!(sampled.jet(C64::new(1.99, 0.0)).is_none());
    }

    #[test]
    fn split_degenerate_cases() {
        let g = disc(32, 32);
        // Phi = id: S1 = S2 = 0, S3 = Delta w.
        let w = MapData::from_fn(&g, conj_square(0.05));
        let sp = composition_split(&ClosedForm(Jet::identity), &w);
        assert!(sp.s1.max_abs() == 0.0 && sp.s2.max_abs() == 0.0);
        assert!((&sp.s3 - &w.laplacian).max_abs() < 1e-15);
        // w = id: S2 = S3 = 0, S1 = Delta Phi.
        let id = MapData::from_fn(&g, Jet::identity);
        let phi = conj_square(0.05);
        let sp = composition_split(&ClosedForm(phi), &id);
        assert!(sp.s2.max_abs() == 0.0 && sp.s3.max_abs() == 0.0);
        let lap_phi = Field::from_fn(&g, |z| phi(z).laplacian());
        assert!((&sp.s1 - &lap_phi).max_abs() < 1e-15);
    }

    #[test]
    fn split_sum_matches_fd() {
        let g = disc(128, 256);
        let shear = |z: C64| Jet {
            v: z + 0.1 * z.conj(),
            zb: C64::new(0.1, 0.0),
            ..Jet::identity(z)
        };
        let phi = conj_square(0.05);
        let w = MapData::from_fn(&g, shear);
        let total = composition_split(&ClosedForm(phi), &w).total();
        let fd = laplacian_fd(&w.w.map(|v| phi(v).v)).unwrap();
        assert!(annulus_rel_err(&total, &fd, 0.0, 1.0) <= 1e-2);
        // A nonlinear inner map with Delta w != 0.
        let a = W0Params::new(0.25).unwrap();
        let w = MapData::from_fn(&g, w0_jet(a));
        let total = composition_split(&ClosedForm(phi), &w).total();
        let fd = laplacian_fd(&w.w.map(|v| phi(v).v)).unwrap();
        assert!(annulus_rel_err(&total, &fd, 0.2, 0.8) <= 1e-2);
    }

    #[test]
    fn real_outer_split_agrees_with_two_re_form() {
        let g = disc(16, 32);
        let a = W0Params::new(0.3).unwrap();
        let w = MapData::from_fn(&g, w0_jet(a));
        let h = ClosedForm(radial_quadratic(0.5, 2.0));
        let lhs = laplacian_of_composition(&h, &w).field;
        let rhs = composition_split(&h, &w).total();
        assert!((&lhs - &rhs).max_abs() <= 1e-12 * lhs.max_abs());
    }

    #[test]
    fn inverse_of_identity_and_conformal_maps_is_harmonic() {
        let g = disc(32, 32);
        let id = DiffeoData::from_fn(&g, Jet::identity);
        assert!(inverse_laplacian_field(&id).unwrap().max_abs() == 0.0);
        let conformal = DiffeoData::from_fn(&g, |z| Jet {
            v: z + 0.05 * z * z,
            z: 1.0 + 0.1 * z,
            zb: ZERO,
            zz: C64::new(0.1, 0.0),
            zzb: ZERO,
            zbzb: ZERO,
        });
        assert!(inverse_laplacian_field(&conformal).unwrap().max_abs() <= 1e-6);
        let r = inverse_laplacian_bound_check(&conformal).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(inverse_laplacian_bound_check(&id).unwrap().max_ratio, 0.0);
    }

    #[test]
    fn folded_map_is_rejected() {
        let g = disc(8, 8);
        let fold = DiffeoData::from_fn(&g, |z| Jet {
            v: z.conj(),
            z: ZERO,
            zb: C64::new(1.0, 0.0),
            ..Jet::identity(z)
        });
        assert_eq!(inverse_laplacian_field(&fold).unwrap_err(), QcError::NotDiffeomorphism);
    }

    fn inverse_check(psi: impl Fn(C64) -> Jet + Copy) -> f64 {
        let g = disc(96, 128);
        let phi = Field::from_fn(&g, |zeta| invert_newton(psi, zeta, zeta).unwrap());
        let fd = laplacian_fd(&phi).unwrap();
        let a_of_phi = phi.map(|z| inverse_laplacian_at(&psi(z)).unwrap());
        annulus_rel_err(&a_of_phi, &fd, 0.0, 0.5)
    }

    #[test]
    fn inverse_laplacian_matches_numerical_inversion() {
        assert!(inverse_check(conj_square(0.05)) <= 5e-2);
        // A map with Psi_zzbar != 0 exercises every term of the bracket.
        let e = 0.05;
        let psi = move |z: C64| Jet {
            v: z + e * z.norm_sqr(),
            z: 1.0 + e * z.conj(),
            zb: e * z,
            zz: ZERO,
            zzb: C64::new(e, 0.0),
            zbzb: ZERO,
        };
        assert!(inverse_check(psi) <= 5e-2);
    }

    #[test]
    fn inverse_bound_constant_is_scale_free() {
        let g = disc(32, 64);
        let ratios: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&e| {
                inverse_laplacian_bound_check(&DiffeoData::from_fn(&g, conj_square(e)))
                    .unwrap()
                    .max_ratio
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        assert!(lo > 0.0 && hi / lo <= 2.0, "{ratios:?}");
    }

    #[test]
    fn numerical_jets_reproduce_closed_form_inverse_laplacian() {
        let g = disc(64, 128);
        let psi = conj_square(0.05);
        let numeric = DiffeoData::from_field(&Field::from_fn(&g, |z| psi(z).v)).unwrap();
        let exact = DiffeoData::from_fn(&g, psi);
        let a = inverse_laplacian_field(&numeric).unwrap();
        let b = inverse_laplacian_field(&exact).unwrap();
        assert!(lp_norm(&(&a - &b), 2.0).unwrap() <= 1e-4 * lp_norm(&b, 2.0).unwrap());
    }

    #[test]
    fn bootstrap_examples() {
        let l = bootstrap_exponents(3.0).unwrap();
        assert_eq!(l.sequence, vec![3.0, 6.0]);
        assert_eq!(l.k0, 1);
        let l = bootstrap_exponents(2.5).unwrap();
        assert_eq!(l.k0, 2);
        assert!((l.sequence[1] - 10.0 / 3.0).abs() < 1e-14);
        assert!((l.sequence[2] - 10.0).abs() < 1e-12);
        assert!(((1.0 - 2.0 / l.sequence[1]) - 2.0 * (1.0 - 2.0 / 2.5)).abs() <= 1e-12);
        assert!(l.doubling_drift <= 1e-12);
        assert_eq!(bootstrap_exponents(8.0 / 3.0).unwrap_err(), QcError::DegenerateExponent);
        assert_eq!(bootstrap_exponents(16.0 / 7.0).unwrap_err(), QcError::DegenerateExponent);
        assert!(matches!(bootstrap_exponents(2.0), Err(QcError::Domain(_))));
        assert!(matches!(bootstrap_exponents(4.0), Err(QcError::Domain(_))));
    }

    #[test]
    fn bootstrap_near_two_terminates() {
        let l = bootstrap_exponents(2.0 + 1e-9).unwrap();
        assert!(*l.sequence.last().unwrap() > 4.0);
        assert!(l.sequence[..l.k0].iter().all(|q| *q <= 4.0));
    }

    #[test]
    fn lipschitz_formula() {
        assert_eq!(lipschitz_bound_formula(1.0, 0.0, 3.7, 0.0).unwrap(), 1.0);
        let v = lipschitz_bound_formula(1.1, 0.2, 1.0, 0.3).unwrap();
        assert!((v - 1.775).abs() < 1e-12);
        assert!(lipschitz_bound_formula(0.9, 0.0, 1.0, 0.0).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lipschitz_formula_is_monotone(
                k in 1.0..3.0f64, t in 0.0..1.0f64, c in 0.1..5.0f64, psi in 0.0..1.0f64,
                dk in 0.0..1.0f64, dt in 0.0..1.0f64, dpsi in 0.0..1.0f64,
            ) {
                let base = lipschitz_bound_formula(k, t, c, psi).unwrap();
                prop_assert!(lipschitz_bound_formula(k + dk, t, c, psi).unwrap() >= base);
                prop_assert!(lipschitz_bound_formula(k, t + dt, c, psi).unwrap() >= base);
                prop_assert!(lipschitz_bound_formula(k, t, c, psi + dpsi).unwrap() >= base);
            }

            #[test]
            fn doubling_identity_holds(q0 in 2.0001..3.9999f64) {
                prop_assume!(excluded_exponents().all(|e| (q0 - e).abs() > 1e-9));
                let l = bootstrap_exponents(q0).unwrap();
                for w in l.sequence.windows(2) {
                    prop_assert!(((1.0 - 2.0 / w[1]) - 2.0 * (1.0 - 2.0 / w[0])).abs() <= 1e-12);
                }
            }
        }
    }
}
