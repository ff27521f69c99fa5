//! Beltrami equation `w_zbar = mu w_z` for compactly supported `mu`: the
//! Beurling and Cauchy transforms as Fourier multipliers on a padded square,
//! the Neumann series for the principal solution, and dilatation quantities.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QcError, Result};
use crate::grid::{lp_norm, lp_norm_where, Field, Grid, SquareGrid, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Smallest radius containing every node where `|f|` is non-negligible.
pub fn support_radius(f: &Field<SquareGrid>) -> f64 {
    let scale = f.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 1e-14 * scale)
        .map(|(i, _)| f.grid().point(i).norm())
        .fold(0.0, f64::max)
}

fn check_padding(f: &Field<SquareGrid>) -> Result<()> {
    if !f.is_finite() {
        return Err(QcError::NonFiniteField);
    }
    if support_radius(f) > 0.5 * f.grid().half_width() {
        return Err(QcError::InsufficientPadding);
    }
    Ok(())
}

/// Beurling transform, multiplier `conj(xi) / xi` (0 at `xi = 0`).
pub fn beurling_transform(f: &Field<SquareGrid>) -> Result<Field<SquareGrid>> {
    check_padding(f)?;
    Ok(beurling_unchecked(f, false))
}

/// Adjoint Beurling transform, multiplier `xi / conj(xi)`.
pub fn beurling_adjoint(f: &Field<SquareGrid>) -> Result<Field<SquareGrid>> {
    check_padding(f)?;
    Ok(beurling_unchecked(f, true))
}

fn beurling_unchecked(f: &Field<SquareGrid>, adjoint: bool) -> Field<SquareGrid> {
    let grid = f.grid();
    let values = grid.apply_multiplier(f.values(), |xi| {
        if xi == ZERO {
            ZERO
        } else if adjoint {
            xi / xi.conj()
        } else {
            xi.conj() / xi
        }
    });
    Field::new(Arc::clone(grid), values).expect("same grid")
}

/// Bessel function `J0`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 25.0 {
        // Trapezoid rule on the periodic integrand of (1/pi) int_0^pi cos(x sin t) dt.
        let n = 64;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + 1.0);
        for j in 1..n {
            s += (x * (j as f64 * h).sin()).cos();
        }
        s / n as f64
    } else {
        let y = 1.0 / (x * x);
        let p = 1.0 - 9.0 / 128.0 * y + 3675.0 / 32768.0 * y * y;
        let q = (-1.0 / 8.0 + 75.0 / 1024.0 * y - 59535.0 / 262144.0 * y * y) / x;
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Cauchy transform `(1/pi) int f(w) / (z - w) dA(w)`.
///
/// Uses the Fourier transform of the kernel truncated to `|z| < R` (`R` the
/// grid half-width), which is smooth at `xi = 0`; the result is the exact
/// aperiodic transform at targets with `|z| <= R - support radius`.
pub fn cauchy_transform(f: &Field<SquareGrid>) -> Result<Field<SquareGrid>> {
    check_padding(f)?;
    let grid = f.grid();
    let l = grid.half_width();
    let values = grid.apply_multiplier(f.values(), |xi| {
        let r = xi.norm();
        if r == 0.0 {
            ZERO
        } else if r * l < 1e-4 {
            // (1 - J0(s)) / s ~ s / 4
            C64::new(0.0, -2.0) * xi.conj() * (l * l / 4.0)
        } else {
            C64::new(0.0, -2.0) * (1.0 - bessel_j0(r * l)) / xi
        }
    });
    Field::new(Arc::clone(grid), values)
}

/// Compactly supported dilatation with `sup |mu| = k < 1`.
#[derive(Debug, Clone)]
pub struct BeltramiProblem {
    mu: Field<SquareGrid>,
    k: f64,
    support_radius: f64,
}

impl BeltramiProblem {
    pub fn new(mu: Field<SquareGrid>) -> Result<Self> {
        if !mu.is_finite() {
            return Err(QcError::NonFiniteField);
        }
        let k = mu.max_abs();
        if k >= 1.0 {
            return Err(QcError::Domain(format!("sup |mu| = {k} >= 1")));
        }
        let support_radius = support_radius(&mu);
        if support_radius > 0.5 * mu.grid().half_width() {
            return Err(QcError::InsufficientPadding);
        }
        Ok(Self {
            mu,
            k,
            support_radius,
        })
    }

    pub fn mu(&self) -> &Field<SquareGrid> {
        &self.mu
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
}

#[derive(Debug, Clone)]
pub struct PrincipalSolution {
    pub w: Field<SquareGrid>,
    pub w_z: Field<SquareGrid>,
    pub w_zbar: Field<SquareGrid>,
    /// `L^2` norm of each Neumann term.
    pub series_residuals: Vec<f64>,
    /// `||w_zbar - mu w_z||_2`.
    pub beltrami_residual: f64,
}

impl PrincipalSolution {
    /// Least-squares geometric decay ratio of the Neumann term norms.
    pub fn fitted_ratio(&self) -> f64 {
        geometric_ratio(&self.series_residuals)
    }
}

/// Least-squares slope of `log x_k` against `k`, exponentiated.
pub fn geometric_ratio(xs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .enumerate()
        .filter(|(_, x)| **x > 0.0)
        .map(|(k, x)| (k as f64, x.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_TERMS: usize = 64;

/// Principal solution by the Neumann series
/// `w_zbar = mu + mu T mu + ...`, `w_z = 1 + T w_zbar`, `w = z + C w_zbar`.
pub fn principal_solve(
    prob: &BeltramiProblem,
    tol: f64,
    max_terms: usize,
) -> Result<PrincipalSolution> {
    if !(tol > 0.0) || max_terms == 0 {
        return Err(QcError::Configuration("tol must be > 0 and max_terms >= 1".into()));
    }
    let mu = &prob.mu;
    let grid = mu.grid();
    let mut term = mu.clone();
    let mut sum = Field::zeros(grid);
    let mut norms = Vec::new();
    for _ in 0..max_terms {
        let norm = lp_norm(&term, 2.0)?;
        if let Some(&prev) = norms.last() {
            if norm >= prev && norm > 0.0 {
                return Err(QcError::SeriesDivergence);
            }
        }
        norms.push(norm);
        sum = &sum + &term;
        if norm < tol {
            break;
        }
        let t = beurling_unchecked(&term, false);
        term = mu.zip_with(&t, |m, v| m * v);
    }
    let w_z = beurling_unchecked(&sum, false).map(|v| v + 1.0);
    let c = cauchy_transform(&sum)?;
    let w = c.map_at(|z, v| z + v);
    let mu_wz = mu.zip_with(&w_z, |m, a| m * a);
    let residual = &sum - &mu_wz;
    let beltrami_residual = lp_norm(&residual, 2.0)?;
    Ok(PrincipalSolution {
        w,
        w_z,
        w_zbar: sum,
        series_residuals: norms,
        beltrami_residual,
    })
}

/// Smooth bump `exp(1 - 1 / (1 - s^2))`, `s = |z - center| / radius`, peak 1.
pub fn bump(z: C64, center: C64, radius: f64) -> f64 {
    let s2 = ((z - center) / radius).norm_sqr();
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// Lower estimate of the `L^p` operator norm of `T` by maximizing
/// `||T f||_p / ||f||_p` over deterministic pseudo-random test fields.
///
/// Candidate `i` depends only on `(seed, i)`, so the estimate is nondecreasing
/// in `trials`.
pub fn beurling_norm_estimate_on(
    grid: &Arc<SquareGrid>,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QcError::Domain(format!("p = {p} outside (1, inf)")));
    }
    let r = grid.half_width();
    let mut best: f64 = 0.0;
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64);
        let f = if i % 2 == 0 {
            gaussian_candidate(grid, &mut rng, 0.2 * r)
        } else {
            indicator_candidate(grid, &mut rng, 0.2 * r)?
        };
        let norm = lp_norm(&f, p)?;
        if norm == 0.0 {
            continue;
        }
        let tf = beurling_unchecked(&f, false);
        best = best.max(lp_norm(&tf, p)? / norm);
    }
    Ok(best)
}

/// [`beurling_norm_estimate_on`] on a default `128 x 128` grid of half-width 4.
pub fn beurling_norm_estimate(p: f64, trials: usize) -> Result<f64> {
    let grid = Arc::new(SquareGrid::new(4.0, 128)?);
    beurling_norm_estimate_on(&grid, p, trials, 0)
}

fn gaussian_candidate(grid: &Arc<SquareGrid>, rng: &mut ChaCha8Rng, spread: f64) -> Field<SquareGrid> {
    let count = rng.gen_range(1..=4);
    let blobs: Vec<(C64, C64, f64)> = (0..count)
        .map(|_| {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * spread;
            let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let s = rng.gen_range(0.15..0.5) * spread;
            (c, a, s)
        })
        .collect();
    Field::from_fn(grid, |z| {
        blobs
            .iter()
            .map(|(c, a, s)| a * (-(z - c).norm_sqr() / (s * s)).exp())
            .sum()
    })
}

/// `T^* h` for `h` a smoothed disc indicator with its mean removed on a larger
/// disc, so that `T (T^* h) = h` is flat while `T^* h` has log-type peaks.
fn indicator_candidate(
    grid: &Arc<SquareGrid>,
    rng: &mut ChaCha8Rng,
    spread: f64,
) -> Result<Field<SquareGrid>> {
    let rho = rng.gen_range(0.3..1.0) * spread;
    let edge = grid.spacing();
    let smooth = |z: C64, radius: f64| 0.5 * (1.0 - ((z.norm() - radius) / edge).tanh());
    let outer = 2.0 * rho;
    let h = Field::from_fn(grid, |z| {
        C64::new(smooth(z, rho) - 0.25 * smooth(z, outer), 0.0)
    });
    Ok(beurling_unchecked(&h, true))
}

#[derive(Debug, Clone)]
pub struct DilatationField<G> {
    pub mu: Field<G>,
    /// Nodewise distortion `(1 + |mu|) / (1 - |mu|)`.
    pub k_field: Field<G>,
    /// Nodes with `w_z = 0`, excluded from the suprema.
    pub invalid: usize,
    pub sup_mu: f64,
    pub sup_k: f64,
}

/// `mu = w_zbar / w_z` and `K = (1 + |mu|) / (1 - |mu|)` nodewise.
pub fn dilatation<G: Grid>(w_z: &Field<G>, w_zbar: &Field<G>) -> DilatationField<G> {
    let mut invalid = 0;
    let mut sup_mu: f64 = 0.0;
    let mut sup_k: f64 = 1.0;
    let mut mu = Vec::with_capacity(w_z.values().len());
    let mut kf = Vec::with_capacity(w_z.values().len());
    for (a, b) in w_z.values().iter().zip(w_zbar.values()) {
        if *a == ZERO {
            invalid += 1;
            mu.push(ZERO);
            kf.push(C64::new(1.0, 0.0));
            continue;
        }
        let m = b / a;
        let k = (1.0 + m.norm()) / (1.0 - m.norm());
        sup_mu = sup_mu.max(m.norm());
        sup_k = if m.norm() >= 1.0 { f64::INFINITY } else { sup_k.max(k) };
        mu.push(m);
        kf.push(C64::new(if m.norm() >= 1.0 { f64::INFINITY } else { k }, 0.0));
    }
    let grid = w_z.grid();
    DilatationField {
        mu: Field::new(Arc::clone(grid), mu).expect("same grid"),
        k_field: Field::new(Arc::clone(grid), kf).expect("same grid"),
        invalid,
        sup_mu,
        sup_k,
    }
}

/// `L^3` norm over the unit disc of `|w_z|^2 + |w_zbar|^2 - 1`.
pub fn psi_deviation<G: Grid>(w_z: &Field<G>, w_zbar: &Field<G>) -> Result<f64> {
    let dev = w_z.zip_with(w_zbar, |a, b| C64::new(a.norm_sqr() + b.norm_sqr() - 1.0, 0.0));
    lp_norm_where(&dev, 3.0, |z| z.norm() < 1.0)
}
