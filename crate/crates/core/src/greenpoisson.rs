//! Harmonic extension of circle data, the Green function of the disc, the
//! zero-boundary inverse Laplacian, and the conjugate-function operator.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{QcError, Result};
use crate::grid::{gauss_legendre_on, lp_norm, signed_frequency, DiscGrid, Field, Grid, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Uniform samples of a function on the unit circle, at angles `2 pi j / n`.
#[derive(Debug, Clone)]
pub struct CircleFn {
    samples: Vec<C64>,
    coeffs: OnceLock<Vec<C64>>,
}

impl CircleFn {
    pub fn new(samples: Vec<C64>) -> Result<Self> {
        if samples.len() < 4 || samples.len() % 2 != 0 {
            return Err(QcError::Configuration(format!(
                "circle sample count {} must be even and >= 4",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(QcError::NonFiniteField);
        }
        Ok(Self {
            samples,
            coeffs: OnceLock::new(),
        })
    }

    /// Samples `f(theta)` at `n` equispaced angles.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|j| f(2.0 * PI * j as f64 / n as f64))
                .collect(),
        )
    }

    fn from_coefficients(coeffs: Vec<C64>) -> Self {
        let n = coeffs.len();
        let mut buf = coeffs.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let out = Self {
            samples: buf,
            coeffs: OnceLock::new(),
        };
        let _ = out.coeffs.set(coeffs);
        out
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.len() as f64
    }

    /// Fourier coefficients in FFT bin order (bin `k` has frequency
    /// `k` for `k < n/2`, `k - n` otherwise).
    pub fn coefficients(&self) -> &[C64] {
        self.coeffs.get_or_init(|| {
            let n = self.len();
            let mut buf = self.samples.clone();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            let s = 1.0 / n as f64;
            buf.iter_mut().for_each(|c| *c *= s);
            buf
        })
    }

    pub fn mean(&self) -> C64 {
        self.coefficients()[0]
    }

    /// Spectral `d/dtheta`.
    pub fn derivative(&self) -> CircleFn {
        let n = self.len();
        let coeffs = self
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if 2 * k == n {
                    ZERO
                } else {
                    c * C64::new(0.0, signed_frequency(k, n) as f64)
                }
            })
            .collect();
        Self::from_coefficients(coeffs)
    }
}

/// Harmonic function `sum_n c_n r^|n| e^{i n theta}` given by finitely many
/// coefficients, written as `P(z) + Q(conj z)` with polynomials `P`, `Q`.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    pos: Vec<C64>,
    neg: Vec<C64>,
}

fn horner(coefs: &[C64], z: C64) -> C64 {
    coefs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

fn poly_derivative(coefs: &[C64]) -> Vec<C64> {
    coefs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| c * n as f64)
        .collect()
}

impl HarmonicExtension {
    pub fn new(b: &CircleFn) -> Self {
        let n = b.len();
        let half = n / 2;
        let c = b.coefficients();
        let mut pos = vec![ZERO; half + 1];
        let mut neg = vec![ZERO; half + 1];
        pos[0] = c[0];
        for k in 1..half {
            pos[k] = c[k];
            neg[k] = c[n - k];
        }
        // The Nyquist bin is the real mode cos(n theta / 2): split it evenly.
        pos[half] = 0.5 * c[half];
        neg[half] = 0.5 * c[half];
        Self { pos, neg }
    }

    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.pos, z) + horner(&self.neg, z.conj())
    }

    pub fn dz(&self, z: C64) -> C64 {
        horner(&poly_derivative(&self.pos), z)
    }

    pub fn dzbar(&self, z: C64) -> C64 {
        horner(&poly_derivative(&self.neg), z.conj())
    }

    /// Jet `(u, u_z, u_zbar, u_zz, u_zzbar, u_zbarzbar)` at each point of `zs`.
    pub fn jets(&self, zs: &[C64]) -> Vec<[C64; 6]> {
        let p1 = poly_derivative(&self.pos);
        let p2 = poly_derivative(&p1);
        let q1 = poly_derivative(&self.neg);
        let q2 = poly_derivative(&q1);
        zs.iter()
            .map(|&z| {
                let zb = z.conj();
                [
                    horner(&self.pos, z) + horner(&self.neg, zb),
                    horner(&p1, z),
                    horner(&q1, zb),
                    horner(&p2, z),
                    ZERO,
                    horner(&q2, zb),
                ]
            })
            .collect()
    }
}

/// Harmonic extension of `b` sampled on `grid` (spectral evaluation, one FFT per ring).
pub fn poisson_extend(b: &CircleFn, grid: &Arc<DiscGrid>) -> Result<Field<DiscGrid>> {
    let nt = grid.n_theta();
    if b.len() != nt {
        return Err(QcError::Configuration(format!(
            "boundary has {} samples, grid has {nt} angles",
            b.len()
        )));
    }
    let c = b.coefficients();
    let mut values = Vec::with_capacity(grid.len());
    for &r in grid.radii() {
        let mut ring: Vec<C64> = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * r.powi(signed_frequency(k, nt).unsigned_abs() as i32))
            .collect();
        grid.inverse_ring(&mut ring);
        values.extend(ring);
    }
    Field::new(Arc::clone(grid), values)
}

/// Green function of the disc, `(1/2 pi) log |(1 - z conj w) / (z - w)|`.
pub fn green_kernel(z: C64, w: C64) -> Result<f64> {
    if z.norm() > 1.0 || w.norm() > 1.0 {
        return Err(QcError::Domain("Green kernel arguments must lie in the closed disc".into()));
    }
    let d = (z - w).norm();
    if d == 0.0 {
        return Err(QcError::KernelSingularity);
    }
    Ok(((C64::new(1.0, 0.0) - z * w.conj()).norm() / d).ln() / (2.0 * PI))
}

/// `|grad_z G(z, w)| = (1 / 2 pi) |-conj w / (1 - z conj w) - 1 / (z - w)|`.
pub fn green_kernel_gradient_norm(z: C64, w: C64) -> Result<f64> {
    if z == w {
        return Err(QcError::KernelSingularity);
    }
    let one = C64::new(1.0, 0.0);
    Ok((-w.conj() / (one - z * w.conj()) - one / (z - w)).norm() / (2.0 * PI))
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientBoundReport {
    pub pairs: usize,
    /// Largest `|grad G| * pi |z - w|`; the bound asserts `<= 1`.
    pub max_ratio: f64,
    pub violations: usize,
}

/// Checks `|grad_z G(z, w)| <= 1 / (pi |z - w|)` at every pair.
pub fn green_kernel_gradient_bound_check(pairs: &[(C64, C64)]) -> Result<GradientBoundReport> {
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for &(z, w) in pairs {
        let ratio = green_kernel_gradient_norm(z, w)? * PI * (z - w).norm();
        if ratio > 1.0 + 1e-12 {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(GradientBoundReport {
        pairs: pairs.len(),
        max_ratio,
        violations,
    })
}

/// Angular Fourier mode `n` of the Green function at radii `r`, `rho`.
fn green_mode(n: u32, r: f64, rho: f64) -> f64 {
    let (lo, hi) = if r < rho { (r, rho) } else { (rho, r) };
    if n == 0 {
        -hi.ln() / (2.0 * PI)
    } else {
        let n = n as i32;
        ((lo / hi).powi(n) - (r * rho).powi(n)) / (4.0 * PI * n as f64)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GreenReport {
    pub warnings: Vec<String>,
    /// Relative size of the highest resolved angular modes of the source.
    pub angular_tail: f64,
    /// Relative size of the last Chebyshev coefficients in `r` of the source.
    pub radial_tail: f64,
}

/// Solves `Delta v = g` in the disc with `v = 0` on the circle, `v = -int G g dA`.
pub fn green_potential(g: &Field<DiscGrid>) -> Result<Field<DiscGrid>> {
    green_potential_report(g).map(|(v, _)| v)
}

/// [`green_potential`] plus resolution warnings.
///
/// The Green function is integrated against `g` mode by mode in `theta`; each
/// radial integral is split at its kink `rho = r` and done by Gauss-Legendre
/// on the polynomial interpolant of the nodal data.
pub fn green_potential_report(g: &Field<DiscGrid>) -> Result<(Field<DiscGrid>, GreenReport)> {
    if !g.is_finite() {
        return Err(QcError::NonFiniteField);
    }
    let grid = g.grid();
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    let radii = grid.radii();
    // h[k][bin] = rho_k * g_bin(rho_k)
    let coeffs = grid.angular_coefficients(g.values());
    let h: Vec<Vec<C64>> = coeffs
        .iter()
        .zip(radii)
        .map(|(row, r)| row.iter().map(|c| c * *r).collect())
        .collect();
    let report = resolution_report(grid, &coeffs);

    let m = nr.max(48);
    let mut out = vec![ZERO; nr * nt];
    let mut vals = vec![ZERO; nt];
    for (i, &r) in radii.iter().enumerate() {
        let (mut xs, mut ws) = gauss_legendre_on(m, 0.0, r);
        let (x2, w2) = gauss_legendre_on(m, r, 1.0);
        xs.extend(x2);
        ws.extend(w2);
        vals.iter_mut().for_each(|v| *v = ZERO);
        for (&x, &w) in xs.iter().zip(&ws) {
            let interp = grid.radial_interpolation_weights(x);
            let mut hx = vec![ZERO; nt];
            for (wk, row) in interp.iter().zip(&h) {
                for (acc, v) in hx.iter_mut().zip(row) {
                    *acc += v * *wk;
                }
            }
            for (bin, acc) in vals.iter_mut().enumerate() {
                let n = signed_frequency(bin, nt).unsigned_abs() as u32;
                *acc += hx[bin] * (w * green_mode(n, r, x));
            }
        }
        for v in vals.iter_mut() {
            *v *= -2.0 * PI;
        }
        let mut ring = vals.clone();
        grid.inverse_ring(&mut ring);
        out[i * nt..(i + 1) * nt].copy_from_slice(&ring);
    }
    Ok((Field::new(Arc::clone(grid), out)?, report))
}

fn resolution_report(grid: &DiscGrid, coeffs: &[Vec<C64>]) -> GreenReport {
    let nt = grid.n_theta();
    let nr = grid.n_r();
    let scale = coeffs
        .iter()
        .flat_map(|row| row.iter().map(|c| c.norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let angular_tail = coeffs
        .iter()
        .flat_map(|row| {
            row.iter()
                .enumerate()
                .filter(|(k, _)| signed_frequency(*k, nt).unsigned_abs() as usize + 2 >= nt / 2)
                .map(|(_, c)| c.norm())
        })
        .fold(0.0, f64::max)
        / scale;
    // Chebyshev coefficients along r of each angular mode (DCT-II by direct sum).
    let mut radial_tail: f64 = 0.0;
    for bin in 0..nt {
        for j in nr.saturating_sub(2)..nr {
            let mut c = ZERO;
            for (k, row) in coeffs.iter().enumerate() {
                let t = (2 * k + 1) as f64 * PI / (2 * nr) as f64;
                c += row[bin] * (j as f64 * t).cos();
            }
            radial_tail = radial_tail.max(2.0 * c.norm() / nr as f64 / scale);
        }
    }
    let mut warnings = Vec::new();
    if angular_tail > 1e-6 {
        warnings.push(format!(
            "source under-resolved in theta (tail {angular_tail:.2e}); increase n_theta"
        ));
    }
    if radial_tail > 1e-6 {
        warnings.push(format!(
            "source under-resolved in r (tail {radial_tail:.2e}); increase n_r"
        ));
    }
    GreenReport {
        warnings,
        angular_tail,
        radial_tail,
    }
}

/// Representation formula: harmonic extension of `b` plus the Green potential of `g`.
pub fn solve_poisson(b: &CircleFn, g: &Field<DiscGrid>) -> Result<Field<DiscGrid>> {
    let harmonic = poisson_extend(b, g.grid())?;
    let v = green_potential(g)?;
    Ok(&harmonic + &v)
}

/// Conjugate function: multiplier `-i sign(n)`, mean and Nyquist mode set to 0.
pub fn hilbert_transform_circle(b: &CircleFn) -> CircleFn {
    let n = b.len();
    let coeffs = b
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == 0 || 2 * k == n {
                ZERO
            } else {
                c * C64::new(0.0, -(signed_frequency(k, n).signum() as f64))
            }
        })
        .collect();
    CircleFn::from_coefficients(coeffs)
}

#[derive(Debug, Clone, Serialize)]
pub struct C1AlphaReport {
    pub alpha: f64,
    pub p: f64,
    /// `sup (|Psi_z - 1| + |Psi_zbar|)` over the nodes.
    pub sup_dpsi_minus_id: f64,
    /// `(r, sup_theta (1 - r)^(1 - alpha) |D^2 Psi|)` per radial node.
    pub holder_profile: Vec<(f64, f64)>,
    pub holder_sup: f64,
    /// `L^p` norm of `|D^2 Psi| = |Psi_zz| + 2 |Psi_zzbar| + |Psi_zbarzbar|`.
    pub d2_lp: f64,
}

/// Harmonic extension of a `C^{1,alpha}` boundary parametrization together with
/// the measured derivative bounds it is expected to satisfy.
pub fn c1alpha_boundary_extend(
    f: &CircleFn,
    grid: &Arc<DiscGrid>,
    alpha: f64,
    p: f64,
) -> Result<(Field<DiscGrid>, C1AlphaReport)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(QcError::Domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(p >= 1.0) || p >= 1.0 / (1.0 - alpha) {
        return Err(QcError::ExponentOutOfRange);
    }
    let psi = poisson_extend(f, grid)?;
    let ext = HarmonicExtension::new(f);
    let points: Vec<C64> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let jets = ext.jets(&points);
    let mut sup_d: f64 = 0.0;
    let mut d2 = Vec::with_capacity(jets.len());
    for j in &jets {
        sup_d = sup_d.max((j[1] - 1.0).norm() + j[2].norm());
        d2.push(C64::new(j[3].norm() + 2.0 * j[4].norm() + j[5].norm(), 0.0));
    }
    let nt = grid.n_theta();
    let holder_profile: Vec<(f64, f64)> = grid
        .radii()
        .iter()
        .enumerate()
        .map(|(ir, &r)| {
            let m = d2[ir * nt..(ir + 1) * nt]
                .iter()
                .map(|v| v.re)
                .fold(0.0, f64::max);
            (r, (1.0 - r).powf(1.0 - alpha) * m)
        })
        .collect();
    let holder_sup = holder_profile.iter().map(|x| x.1).fold(0.0, f64::max);
    let d2_lp = lp_norm(&Field::new(Arc::clone(grid), d2)?, p)?;
    Ok((
        psi,
        C1AlphaReport {
            alpha,
            p,
            sup_dpsi_minus_id: sup_d,
            holder_profile,
            holder_sup,
            d2_lp,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian_fd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(nr: usize, nt: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(nr, nt).unwrap())
    }

    fn max_err(f: &Field<DiscGrid>, exact: impl Fn(C64) -> C64) -> f64 {
        (0..f.grid().len())
            .map(|i| (f.values()[i] - exact(f.grid().point(i))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn poisson_extension_examples() {
        let g = disc(32, 64);
        let one = CircleFn::from_fn(64, |_| C64::new(1.0, 0.0)).unwrap();
        assert!(max_err(&poisson_extend(&one, &g).unwrap(), |_| C64::new(1.0, 0.0)) < 1e-14);
        let e1 = CircleFn::from_fn(64, |t| C64::from_polar(1.0, t)).unwrap();
        assert!(max_err(&poisson_extend(&e1, &g).unwrap(), |z| z) < 1e-14);
        let c3 = CircleFn::from_fn(64, |t| C64::new((3.0 * t).cos(), 0.0)).unwrap();
        let u = poisson_extend(&c3, &g).unwrap();
        assert!(max_err(&u, |z| C64::new((z * z * z).re, 0.0)) <= 1e-8);
    }

    #[test]
    fn mean_value_property() {
        let b = CircleFn::from_fn(64, |t| C64::new((t.sin() + 2.0).ln(), t.cos().powi(3))).unwrap();
        let ext = HarmonicExtension::new(&b);
        let mean: C64 = b.samples().iter().sum::<C64>() / 64.0;
        assert!((ext.eval(C64::new(0.0, 0.0)) - mean).norm() < 1e-10);
    }

    #[test]
    fn extension_matches_pointwise_evaluation() {
        let g = disc(16, 32);
        let b = CircleFn::from_fn(32, |t| C64::new(t.cos().exp(), (2.0 * t).sin())).unwrap();
        let u = poisson_extend(&b, &g).unwrap();
        let ext = HarmonicExtension::new(&b);
        assert!(max_err(&u, |z| ext.eval(z)) < 1e-12);
    }

    #[test]
    fn green_kernel_examples() {
        let v = green_kernel(C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap();
        assert!((v - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
        assert!((v - 0.110318).abs() < 1e-6);
        let z = C64::new(0.2, -0.1);
        let near = C64::from_polar(1.0 - 1e-6, 0.7);
        let edge = green_kernel(z, near).unwrap();
        assert!((0.0..1e-5).contains(&edge));
        assert_eq!(green_kernel(z, z), Err(QcError::KernelSingularity));
    }

    #[test]
    fn green_kernel_is_symmetric_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z = C64::from_polar(rng.gen::<f64>().sqrt() * 0.999, rng.gen::<f64>() * 2.0 * PI);
            let w = C64::from_polar(rng.gen::<f64>().sqrt() * 0.999, rng.gen::<f64>() * 2.0 * PI);
            let a = green_kernel(z, w).unwrap();
            let b = green_kernel(w, z).unwrap();
            assert!(a >= 0.0);
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gradient_bound_examples() {
        let r = green_kernel_gradient_bound_check(&[(C64::new(0.0, 0.0), C64::new(0.5, 0.0))])
            .unwrap();
        assert!(r.max_ratio <= 1.0);
        // Interior diagonal: the ratio tends to 1/2.
        let w = C64::new(0.3, 0.1);
        let d = C64::from_polar(1e-7, 1.1);
        let r = green_kernel_gradient_bound_check(&[(w + d, w)]).unwrap();
        assert!((r.max_ratio - 0.5).abs() < 1e-5);
        // Near the circle, with z outward of w, it approaches the bound.
        let w = C64::new(1.0 - 1e-6, 0.0);
        let z = C64::new(1.0 - 1e-9, 0.0);
        let r = green_kernel_gradient_bound_check(&[(z, w)]).unwrap();
        assert!(r.max_ratio > 0.99 && r.max_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn green_potential_of_zero_is_zero() {
        let g = disc(16, 32);
        let v = green_potential(&Field::zeros(&g)).unwrap();
        assert!(v.values().iter().all(|c| *c == C64::new(0.0, 0.0)));
    }

    #[test]
    fn green_potential_of_constant_source() {
        let g = disc(128, 256);
        let (v, report) = green_potential_report(&Field::constant(&g, C64::new(4.0, 0.0))).unwrap();
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        assert!(max_err(&v, |z| C64::new(z.norm_sqr() - 1.0, 0.0)) <= 1e-3);
    }

    #[test]
    fn green_potential_inverts_laplacian_on_smooth_source() {
        let g = disc(64, 64);
        let src = Field::from_fn(&g, |z| C64::new((2.0 * z.re).cos() + z.im * z.re * z.re, 0.5 * z.im));
        let v = green_potential(&src).unwrap();
        let lap = laplacian_fd(&v).unwrap();
        let res = lp_norm(&(&lap - &src), 2.0).unwrap() / lp_norm(&src, 2.0).unwrap();
        assert!(res <= 1e-2, "{res}");
        let edge = g.ring_at(v.values(), 1.0);
        let interior = v.max_abs();
        assert!(edge.iter().all(|c| c.norm() <= 1e-6 * interior));
    }

    #[test]
    fn solve_poisson_examples() {
        let g = disc(64, 64);
        let zero = CircleFn::from_fn(64, |_| C64::new(0.0, 0.0)).unwrap();
        let four = Field::constant(&g, C64::new(4.0, 0.0));
        let v = solve_poisson(&zero, &four).unwrap();
        assert!(max_err(&v, |z| C64::new(z.norm_sqr() - 1.0, 0.0)) <= 1e-3);
        let e1 = CircleFn::from_fn(64, |t| C64::from_polar(1.0, t)).unwrap();
        let v = solve_poisson(&e1, &Field::zeros(&g)).unwrap();
        assert!(max_err(&v, |z| z) <= 1e-12);
    }

    #[test]
    fn hilbert_transform_examples() {
        let n = 64;
        let cos = CircleFn::from_fn(n, |t| C64::new(t.cos(), 0.0)).unwrap();
        let h = hilbert_transform_circle(&cos);
        for (j, v) in h.samples().iter().enumerate() {
            assert!((v - C64::new(h.angle(j).sin(), 0.0)).norm() < 1e-12);
        }
        let c = CircleFn::from_fn(n, |_| C64::new(3.0, 0.0)).unwrap();
        assert!(hilbert_transform_circle(&c).samples().iter().all(|v| v.norm() < 1e-15));
        let b = CircleFn::from_fn(n, |t| C64::new((5.0 * t).cos() + (2.0 * t).sin(), 0.0)).unwrap();
        let h = hilbert_transform_circle(&b);
        for (j, v) in h.samples().iter().enumerate() {
            let t = h.angle(j);
            assert!((v - C64::new((5.0 * t).sin() - (2.0 * t).cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hilbert_squared_is_minus_identity_off_mean() {
        let b = CircleFn::from_fn(32, |t| C64::new(1.5 + t.sin().exp(), (3.0 * t).cos())).unwrap();
        let hh = hilbert_transform_circle(&hilbert_transform_circle(&b));
        let mean = b.mean();
        let nyq = b.coefficients()[16];
        for (j, (x, y)) in hh.samples().iter().zip(b.samples()).enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x + (y - mean - nyq * sign)).norm() < 1e-12);
        }
    }

    #[test]
    fn c1alpha_extension_examples() {
        let g = disc(48, 64);
        let id = CircleFn::from_fn(64, |t| C64::from_polar(1.0, t)).unwrap();
        let (psi, rep) = c1alpha_boundary_extend(&id, &g, 0.5, 1.5).unwrap();
        assert!(max_err(&psi, |z| z) < 1e-13);
        assert!(rep.sup_dpsi_minus_id < 1e-13);
        let pert = CircleFn::from_fn(64, |t| {
            C64::from_polar(1.0, t) + 0.01 * C64::from_polar(1.0, 2.0 * t)
        })
        .unwrap();
        let (_, rep) = c1alpha_boundary_extend(&pert, &g, 0.5, 1.5).unwrap();
        assert!((rep.sup_dpsi_minus_id - 0.02).abs() <= 0.2 * 0.02);
        assert_eq!(
            c1alpha_boundary_extend(&pert, &g, 0.5, 2.0).unwrap_err(),
            QcError::ExponentOutOfRange
        );
    }

    #[test]
    fn c1alpha_report_is_linear_in_perturbation() {
        let g = disc(32, 128);
        let alpha = 0.5;
        let bump = |t: f64| {
            let s = (t - PI).abs();
            (s.powf(1.0 + alpha) - 1.5 * s * s / PI.powf(1.0 - alpha)) * 0.1
        };
        let sups: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|eps| {
                let f = CircleFn::from_fn(128, |t| C64::from_polar(1.0 + eps * bump(t), t)).unwrap();
                c1alpha_boundary_extend(&f, &g, alpha, 1.5).unwrap().1.sup_dpsi_minus_id
            })
            .collect();
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            assert!((2.0 / 1.3..=2.0 * 1.3).contains(&ratio), "{ratio}");
        }
    }
}
