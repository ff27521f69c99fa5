//! Boundary-behaviour instruments: arc-length profiles of harmonic maps, the
//! splitting `f = a + conj(b) + v`, the `|a'|` inequality on the outer
//! annulus, Lipschitz estimates and a mass-concentration test for absolute
//! continuity of boundary maps.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{QcError, Result};
use crate::greenpoisson::{green_potential, CircleFn, HarmonicExtension};
use crate::grid::{gradient, laplacian_fd, DiscGrid, Field, Grid, C64};
use crate::halfplane::LineFn;

/// Relative Laplacian residual above which a field is not treated as harmonic.
pub const HARMONIC_TOLERANCE: f64 = 1e-3;

/// Relative slack allowed in monotonicity of the arc-length profile.
pub const MONOTONE_SLACK: f64 = 1e-4;

/// Samples of `|d/dtheta u(r e^{i theta})|` on a ladder of radii, with the
/// total masses `|Gamma_r| = int |d/dtheta u| dtheta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryDerivativeMeasure {
    pub radii: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Largest relative drop `(m_i - m_{i+1}) / m_i` between consecutive radii.
    pub max_relative_decrease: f64,
    pub nondecreasing: bool,
    /// Relative Laplacian residual of the input on the ladder's disc.
    pub harmonic_residual: f64,
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty()
        || ladder.windows(2).any(|w| w[0] >= w[1])
        || ladder[0] <= 0.0
        || ladder[ladder.len() - 1] >= 1.0
    {
        return Err(QcError::Domain(
            "radius ladder must be strictly increasing inside (0, 1)".into(),
        ));
    }
    Ok(())
}

/// `max |Delta u| / max |u|` over nodes with `|z| <= r_max`.
fn harmonic_residual(u: &Field<DiscGrid>, r_max: f64) -> Result<f64> {
    let lap = laplacian_fd(u)?;
    let grid = u.grid();
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for i in 0..grid.len() {
        if grid.point(i).norm() <= r_max {
            num = num.max(lap.values()[i].norm());
        }
        den = den.max(u.values()[i].norm());
    }
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

pub fn arc_length_profile(u: &Field<DiscGrid>, ladder: &[f64]) -> Result<BoundaryDerivativeMeasure> {
    check_ladder(ladder)?;
    let r_max = ladder[ladder.len() - 1];
    let residual = harmonic_residual(u, r_max)?;
    if residual > HARMONIC_TOLERANCE {
        return Err(QcError::NotHarmonic(residual));
    }
    let grid = u.grid();
    let dtheta = 2.0 * PI / grid.n_theta() as f64;
    let mut samples = Vec::with_capacity(ladder.len());
    let mut masses = Vec::with_capacity(ladder.len());
    for &r in ladder {
        let ring = grid.ring_at(u.values(), r);
        let (d1, _) = grid.ring_derivatives(&ring);
        let s: Vec<f64> = d1.iter().map(|v| v.norm()).collect();
        masses.push(s.iter().sum::<f64>() * dtheta);
        samples.push(s);
    }
    let max_relative_decrease = masses
        .windows(2)
        .map(|w| if w[0] > 0.0 { (w[0] - w[1]) / w[0] } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(BoundaryDerivativeMeasure {
        radii: ladder.to_vec(),
        samples,
        masses,
        max_relative_decrease,
        nondecreasing: max_relative_decrease <= MONOTONE_SLACK,
        harmonic_residual: residual,
    })
}

/// Total variation `int |b'(theta)| d theta` of circle data, by spectral
/// differentiation and the trapezoid rule.
pub fn boundary_total_variation(b: &CircleFn) -> f64 {
    let d = b.derivative();
    d.samples().iter().map(|v| v.norm()).sum::<f64>() * 2.0 * PI / b.len() as f64
}

/// `w = a + conj(b) + v`: `v` has Laplacian `g` and zero boundary values,
/// `u = a + conj(b)` is the harmonic extension of the trace of `w`.
#[derive(Debug, Clone)]
pub struct FSplit {
    pub a_prime: Field<DiscGrid>,
    pub b_prime: Field<DiscGrid>,
    pub v: Field<DiscGrid>,
    pub u: Field<DiscGrid>,
    pub trace: CircleFn,
}

impl FSplit {
    /// Relative L2 distance between `u + v` and `w`.
    pub fn reassembly_error(&self, w: &Field<DiscGrid>) -> Result<f64> {
        let sum = &self.u + &self.v;
        relative_l2(&sum, w)
    }
}

fn relative_l2(a: &Field<DiscGrid>, b: &Field<DiscGrid>) -> Result<f64> {
    let grid = a.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.len() {
        let wgt = grid.weight(i);
        num += wgt * (a.values()[i] - b.values()[i]).norm_sqr();
        den += wgt * b.values()[i].norm_sqr();
    }
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

/// Boundary trace of a grid field, extrapolating each angular column to `r = 1`.
pub fn boundary_trace(w: &Field<DiscGrid>) -> Result<CircleFn> {
    CircleFn::new(w.grid().ring_at(w.values(), 1.0))
}

pub fn split_f(w: &Field<DiscGrid>, g: &Field<DiscGrid>) -> Result<FSplit> {
    if !Arc::ptr_eq(w.grid(), g.grid()) && w.grid().len() != g.grid().len() {
        return Err(QcError::Configuration("w and g live on different grids".into()));
    }
    let grid = w.grid();
    let v = green_potential(g)?;
    let trace = boundary_trace(w)?;
    let ext = HarmonicExtension::new(&trace);
    let zs: Vec<C64> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let jets = ext.jets(&zs);
    let field = |f: &dyn Fn(&[C64; 6]) -> C64| {
        Field::new(Arc::clone(grid), jets.iter().map(f).collect())
    };
    Ok(FSplit {
        u: field(&|j| j[0])?,
        a_prime: field(&|j| j[1])?,
        // u_zbar = conj(b'(z)).
        b_prime: field(&|j| j[2].conj())?,
        v,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct APrimeReport {
    pub k: f64,
    pub r_max: f64,
    pub nodes: usize,
    /// `max (|a'| - rhs)`, clipped at 0.
    pub max_violation: f64,
    /// `max (|a'| - rhs) / rhs` over the nodes (negative when every node has margin).
    pub max_relative_excess: f64,
    /// Relative L2 residual of `b' = (zbar/z) conj(a') - (i/z) conj(u_theta)`.
    pub b_relation_residual: f64,
}

impl APrimeReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.max_relative_excess <= slack
    }
}

/// Checks `|a'| <= (2 |u_theta| + |v_zbar| + |v_z|) / (1 - k)` at the nodes of
/// the annulus `1/2 <= |z| <= r_max`, with `u_theta` taken by spectral
/// differentiation of the harmonic part on each ring.
pub fn aprime_inequality_check(
    w: &Field<DiscGrid>,
    g: &Field<DiscGrid>,
    k: f64,
    r_max: f64,
) -> Result<APrimeReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(QcError::Domain(format!("dilatation bound k = {k} outside [0, 1)")));
    }
    if !(r_max > 0.5 && r_max <= 1.0) {
        return Err(QcError::Domain(format!("r_max = {r_max} outside (1/2, 1]")));
    }
    let split = split_f(w, g)?;
    let grid = w.grid();
    let (vz, vzb) = gradient(&split.v)?;
    let nt = grid.n_theta();
    let i_unit = C64::new(0.0, 1.0);
    let mut nodes = 0;
    let mut max_violation: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let (mut res_num, mut res_den) = (0.0, 0.0);
    for (ir, &r) in grid.radii().iter().enumerate() {
        if r < 0.5 || r > r_max {
            continue;
        }
        let off = ir * nt;
        let (u_theta, _) = grid.ring_derivatives(&split.u.values()[off..off + nt]);
        for jt in 0..nt {
            let idx = off + jt;
            let z = grid.point(idx);
            let ap = split.a_prime.values()[idx];
            let bp = split.b_prime.values()[idx];
            let ut = u_theta[jt];
            let lhs = ap.norm();
            let rhs = (2.0 * ut.norm() + vzb.values()[idx].norm() + vz.values()[idx].norm())
                / (1.0 - k);
            max_violation = max_violation.max(lhs - rhs);
            let excess = if rhs > 0.0 {
                (lhs - rhs) / rhs
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            max_excess = max_excess.max(excess);
            let predicted = z.conj() / z * ap.conj() - i_unit / z * ut.conj();
            let wgt = grid.weight(idx);
            res_num += wgt * (bp - predicted).norm_sqr();
            res_den += wgt * (bp.norm_sqr() + ap.norm_sqr());
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(QcError::Configuration("no grid radii in the annulus".into()));
    }
    Ok(APrimeReport {
        k,
        r_max,
        nodes,
        max_violation,
        max_relative_excess: max_excess,
        b_relation_residual: if res_den > 0.0 {
            (res_num / res_den).sqrt()
        } else {
            res_num.sqrt()
        },
    })
}

/// `sup |w_z| + |w_zbar|` with derivatives taken on the grid.
pub fn lipschitz_estimate(w: &Field<DiscGrid>) -> Result<f64> {
    let (wz, wzb) = gradient(w)?;
    Ok(lipschitz_from_derivatives(&wz, &wzb))
}

/// `sup |w_z| + |w_zbar|` from given derivative fields.
pub fn lipschitz_from_derivatives<G: Grid>(w_z: &Field<G>, w_zbar: &Field<G>) -> f64 {
    w_z.values()
        .iter()
        .zip(w_zbar.values())
        .map(|(a, b)| a.norm() + b.norm())
        .fold(0.0, f64::max)
}

/// Boundary data whose increments are tested for absolute continuity.
#[derive(Debug, Clone)]
pub enum BoundaryTrace {
    /// `g(x) = x + g0(x)` on `[-1, 1]`; the increments of the non-affine part
    /// `g0` are analysed when `g0` is nondecreasing and non-constant, since
    /// the affine part is absolutely continuous, otherwise those of `g`.
    Line(LineFn),
    /// A circle homeomorphism `e^{i phi(theta)}`; increments of the unwrapped `phi`.
    Circle(CircleFn),
    /// Values of a monotone function at equispaced points of an interval.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AcVerdict {
    #[serde(rename = "AC-consistent")]
    AcConsistent,
    #[serde(rename = "singular-consistent")]
    SingularConsistent,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl AcVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            AcVerdict::AcConsistent => "AC-consistent",
            AcVerdict::SingularConsistent => "singular-consistent",
            AcVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Share of mass that the carrying set must hold.
pub const CARRIED_MASS: f64 = 0.9;
/// Smallest fraction treated as a positive density floor.
pub const AC_FLOOR: f64 = 0.05;
/// Largest relative spread of the three finest fractions for an AC verdict.
pub const AC_SPREAD: f64 = 0.05;
/// Required decrease factor from the coarsest to the finest resolution.
pub const SINGULAR_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcReport {
    /// Exponents `m` of the cell widths `2^-m` (relative to the domain length 2 on
    /// the line, `2 pi` on the circle, 1 for raw samples).
    pub resolutions: Vec<u32>,
    /// Smallest fraction of cells carrying 90% of the increment mass.
    pub fractions: Vec<f64>,
    pub verdict: AcVerdict,
    /// Which increments were analysed.
    pub analysed: String,
}

/// Smallest fraction of `increments` (all `>= 0`) whose sum reaches 90% of the total.
pub fn carrying_fraction(increments: &[f64]) -> f64 {
    let mut inc = increments.to_vec();
    inc.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = inc.iter().sum();
    let mut acc = 0.0;
    for (k, v) in inc.iter().enumerate() {
        acc += v;
        if acc >= CARRIED_MASS * total * (1.0 - 1e-12) {
            return (k + 1) as f64 / inc.len() as f64;
        }
    }
    1.0
}

/// Increments of the piecewise-linear interpolant of equispaced values
/// `f(k / (len - 1))`, `k = 0..len`, over `cells` equal cells of `[0, 1]`.
fn cell_increments(values: &[f64], cells: usize) -> Vec<f64> {
    let n = values.len() - 1;
    let at = |s: f64| {
        let pos = s * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let f = pos - k as f64;
        values[k] * (1.0 - f) + values[k + 1] * f
    };
    (0..cells)
        .map(|c| at((c + 1) as f64 / cells as f64) - at(c as f64 / cells as f64))
        .collect()
}

fn monotone_values(values: Vec<f64>) -> Result<Vec<f64>> {
    if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return Err(QcError::NotHomeomorphismTrace);
    }
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    if up && values[0] != values[values.len() - 1] {
        Ok(values)
    } else if down && values[0] != values[values.len() - 1] {
        Ok(values.into_iter().map(|v| -v).collect())
    } else {
        Err(QcError::NotHomeomorphismTrace)
    }
}

pub fn absolute_continuity_detector(boundary: &BoundaryTrace, resolutions: &[u32]) -> Result<AcReport> {
    if resolutions.len() < 3 {
        return Err(QcError::Configuration("at least three resolutions are needed".into()));
    }
    let mut resolutions = resolutions.to_vec();
    resolutions.sort_unstable();
    resolutions.dedup();
    if resolutions.len() < 3 || resolutions[resolutions.len() - 1] > 24 {
        return Err(QcError::Configuration("resolutions must be distinct and <= 24".into()));
    }
    // (values on a uniform partition, number of cells at resolution m)
    let (values, analysed, cells_at): (Vec<f64>, &str, fn(u32) -> usize) = match boundary {
        BoundaryTrace::Line(g) => {
            let s = g.samples();
            let g0_monotone = s.windows(2).all(|w| w[1] >= w[0]) && s[0] != s[s.len() - 1];
            if g0_monotone {
                (s.to_vec(), "g0", |m| 1usize << (m + 1))
            } else {
                let dx = g.spacing();
                let full = s.iter().enumerate().map(|(k, v)| v + k as f64 * dx).collect();
                (full, "g", |m| 1usize << (m + 1))
            }
        }
        BoundaryTrace::Circle(b) => {
            let n = b.len();
            let mut phase = Vec::with_capacity(n + 1);
            let mut prev = b.samples()[0].arg();
            phase.push(prev);
            for j in 1..=n {
                let z = b.samples()[j % n];
                let step = (z / b.samples()[j - 1]).arg();
                prev += step;
                phase.push(prev);
            }
            if ((phase[n] - phase[0]).abs() - 2.0 * PI).abs() > 1e-6 {
                return Err(QcError::NotHomeomorphismTrace);
            }
            (phase, "phase", |m| 1usize << m)
        }
        BoundaryTrace::Samples(v) => (v.clone(), "samples", |m| 1usize << m),
    };
    let values = monotone_values(values)?;
    let fractions: Vec<f64> = resolutions
        .iter()
        .map(|&m| carrying_fraction(&cell_increments(&values, cells_at(m))))
        .collect();
    let verdict = classify(&fractions);
    Ok(AcReport {
        resolutions,
        fractions,
        verdict,
        analysed: analysed.to_string(),
    })
}

fn classify(fractions: &[f64]) -> AcVerdict {
    let n = fractions.len();
    let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
    if decreasing && fractions[0] >= SINGULAR_FACTOR * fractions[n - 1] {
        return AcVerdict::SingularConsistent;
    }
    let finest = &fractions[n - 3..];
    let max = finest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = finest.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= AC_FLOOR && (max - min) <= AC_SPREAD * max {
        return AcVerdict::AcConsistent;
    }
    AcVerdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greenpoisson::poisson_extend;

    fn disc(nr: usize, nt: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(nr, nt).unwrap())
    }

    fn ladder(n: usize, r_max: f64) -> Vec<f64> {
        (1..=n).map(|k| r_max * k as f64 / n as f64).collect()
    }

    #[test]
    fn arc_length_of_identity_is_circumference() {
        let g = disc(32, 64);
        let u = Field::from_fn(&g, |z| z);
        let rs = ladder(10, 0.95);
        let p = arc_length_profile(&u, &rs).unwrap();
        for (r, m) in rs.iter().zip(&p.masses) {
            assert!((m - 2.0 * PI * r).abs() < 1e-10);
        }
        assert!(p.nondecreasing);
    }

    #[test]
    fn arc_length_of_re_z_squared() {
        let g = disc(32, 64);
        let u = Field::from_fn(&g, |z| C64::new((z * z).re, 0.0));
        let rs = ladder(8, 0.9);
        let p = arc_length_profile(&u, &rs).unwrap();
        // |d/dtheta r^2 cos 2 theta| = 2 r^2 |sin 2 theta|, integral 8 r^2.
        for (r, m) in rs.iter().zip(&p.masses) {
            assert!((m - 8.0 * r * r).abs() < 1e-2 * 8.0 * r * r, "{m}");
        }
        assert!(p.nondecreasing);
    }

    #[test]
    fn arc_length_of_homeomorphism_extension() {
        let g = disc(48, 128);
        let b = CircleFn::from_fn(128, |t| C64::from_polar(1.0, t + 0.3 * t.sin())).unwrap();
        let u = poisson_extend(&b, &g).unwrap();
        let p = arc_length_profile(&u, &ladder(20, 0.95)).unwrap();
        assert!(p.nondecreasing);
        let tv = boundary_total_variation(&b);
        assert!((tv - 2.0 * PI).abs() < 1e-8);
        assert!(*p.masses.last().unwrap() <= tv);
    }

    #[test]
    fn non_harmonic_input_rejected() {
        let g = disc(32, 64);
        let u = Field::from_fn(&g, |z| C64::new(z.norm_sqr(), 0.0));
        assert!(matches!(
            arc_length_profile(&u, &[0.5, 0.6]),
            Err(QcError::NotHarmonic(_))
        ));
        assert!(arc_length_profile(&u, &[0.6, 0.5]).is_err());
    }

    #[test]
    fn split_of_analytic_and_antianalytic() {
        let g = disc(32, 64);
        let zero = Field::zeros(&g);
        let w = Field::from_fn(&g, |z| z + z * z * z / 3.0);
        let s = split_f(&w, &zero).unwrap();
        for i in 0..g.len() {
            let z = g.point(i);
            assert!((s.a_prime.values()[i] - (1.0 + z * z)).norm() < 1e-9);
            assert!(s.b_prime.values()[i].norm() < 1e-9);
            assert!(s.v.values()[i].norm() < 1e-12);
        }
        let w = Field::from_fn(&g, |z| z.conj());
        let s = split_f(&w, &zero).unwrap();
        for i in 0..g.len() {
            assert!(s.a_prime.values()[i].norm() < 1e-9);
            assert!((s.b_prime.values()[i] - 1.0).norm() < 1e-9);
        }
        assert!(s.reassembly_error(&w).unwrap() < 1e-9);
    }

    #[test]
    fn aprime_inequality_on_affine_maps() {
        let g = disc(32, 64);
        let zero = Field::zeros(&g);
        let w = Field::from_fn(&g, |z| z + z * z / 4.0);
        let rep = aprime_inequality_check(&w, &zero, 0.0, 0.95).unwrap();
        assert!(rep.holds(0.0));
        assert!(rep.b_relation_residual < 1e-9);
        let w = Field::from_fn(&g, |z| z + 0.1 * z.conj());
        let rep = aprime_inequality_check(&w, &zero, 0.1, 0.95).unwrap();
        // |a'| = 1 and 2 |u_theta| / (1 - k) = 2 |z - 0.1 zbar| / 0.9 >= 1 for |z| >= 1/2,
        // with equality only on the inner circle.
        assert!(rep.max_relative_excess <= 1e-12);
        let inner = g.radii().iter().find(|&&r| r >= 0.5).unwrap();
        let expect = 0.9 / (2.0 * 0.9 * inner) - 1.0;
        assert!((rep.max_relative_excess - expect).abs() < 1e-9);
        assert!(rep.b_relation_residual < 1e-9);
    }

    #[test]
    fn lipschitz_of_affine_maps() {
        let g = disc(16, 32);
        let id = Field::from_fn(&g, |z| z);
        assert!((lipschitz_estimate(&id).unwrap() - 1.0).abs() < 1e-10);
        let sh = Field::from_fn(&g, |z| z + 0.1 * z.conj());
        assert!((lipschitz_estimate(&sh).unwrap() - 1.1).abs() < 1e-10);
    }

    #[test]
    fn detector_calibration_inputs() {
        let res = [8, 9, 10, 11, 12];
        let id = absolute_continuity_detector(&BoundaryTrace::Line(LineFn::identity()), &res).unwrap();
        assert_eq!(id.verdict, AcVerdict::AcConsistent);
        assert!(id.fractions.iter().all(|f| (f - 0.9).abs() < 1e-3));
        let smooth = LineFn::from_g0(14, |x| 0.5 * (x + 1.0) + 0.1 * (PI * x).sin()).unwrap();
        let rep = absolute_continuity_detector(&BoundaryTrace::Line(smooth), &res).unwrap();
        assert_eq!(rep.verdict, AcVerdict::AcConsistent);
        assert_eq!(rep.analysed, "g0");
        let bad = BoundaryTrace::Samples(vec![0.0, 1.0, 0.5, 2.0]);
        assert_eq!(
            absolute_continuity_detector(&bad, &res).unwrap_err(),
            QcError::NotHomeomorphismTrace
        );
        let circle = CircleFn::from_fn(4096, |t| C64::from_polar(1.0, t + 0.3 * t.sin())).unwrap();
        let rep = absolute_continuity_detector(&BoundaryTrace::Circle(circle), &[6, 7, 8, 9]).unwrap();
        assert_eq!(rep.verdict, AcVerdict::AcConsistent);
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[0.6, 0.5, 0.39]), AcVerdict::SingularConsistent);
        assert_eq!(classify(&[0.6, 0.5, 0.41]), AcVerdict::Inconclusive);
        assert_eq!(classify(&[0.3, 0.5, 0.5, 0.5]), AcVerdict::AcConsistent);
        assert_eq!(classify(&[0.04, 0.04, 0.04]), AcVerdict::Inconclusive);
    }
}
