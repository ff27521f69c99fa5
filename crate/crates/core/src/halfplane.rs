//! Upper half-plane machinery: boundary maps `g(x) = x + g0(x)` with `g0`
//! constant outside `[-1, 1]`, their Gaussian-mollifier extension
//! `u(x + it) = (psi_t * g)(x) + i (psi'_t * g)(x)`, Zygmund seminorms,
//! dyadic decompositions and the Riesz-product construction of singular
//! Zygmund boundary data.
//!
//! `g0` is stored as samples on a dyadic grid of `[-1, 1]` and interpolated
//! linearly, so the increment measure `dg0` has a piecewise-constant density.
//! Every convolution integrates the kernel's closed-form antiderivative over
//! each cell, which is exact at the finest level; coarser levels aggregate
//! cells of width at most `t / 64`.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{QcError, Result};
use crate::grid::C64;

/// Largest supported sample count, as a power of two.
pub const MAX_SAMPLES_LOG2: u32 = 22;

/// Half-width of the Gaussian convolution window, in units of `t`.
pub const GAUSSIAN_REACH: f64 = 12.0;

/// Ratio between a scale `t` and the widest cell used to resolve it.
const CELLS_PER_SCALE: f64 = 64.0;

/// The imaginary part of the extension is `+psi'_t * g`, so that the identity
/// extends to the identity; with `-psi'_t * g` it would be `x - it`.
pub const SIGN_CONVENTION: &str = "Im u = +(psi'_t * g), so g = id extends to x + it";

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn psi(s: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * s * s).exp()
}

fn normal_cdf(s: f64) -> f64 {
    0.5 * libm::erfc(-s / std::f64::consts::SQRT_2)
}

/// Boundary map `g(x) = x + g0(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFn {
    samples: Arc<Vec<f64>>,
}

impl LineFn {
    /// `samples[k] = g0(-1 + 2k/M)` for `k = 0..=M`, with `M` a power of two.
    /// Tails are `samples[0]` and `samples[M]`.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let m = samples.len().saturating_sub(1);
        if m == 0 || !m.is_power_of_two() || m > 1 << MAX_SAMPLES_LOG2 {
            return Err(QcError::Configuration(format!(
                "LineFn needs 2^k + 1 samples with k <= {MAX_SAMPLES_LOG2}, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(QcError::NonFiniteField);
        }
        let dx = 2.0 / m as f64;
        if samples.windows(2).any(|w| dx + w[1] - w[0] <= 0.0) {
            return Err(QcError::NotHomeomorphismTrace);
        }
        Ok(Self {
            samples: Arc::new(samples),
        })
    }

    pub fn identity() -> Self {
        Self::shift(0.0)
    }

    /// `g(x) = x + c`.
    pub fn shift(c: f64) -> Self {
        Self {
            samples: Arc::new(vec![c, c]),
        }
    }

    /// Samples `g0` at `2^log2_m + 1` equispaced points of `[-1, 1]`.
    pub fn from_g0(log2_m: u32, g0: impl Fn(f64) -> f64) -> Result<Self> {
        let m = 1usize << log2_m.min(MAX_SAMPLES_LOG2 + 1);
        let dx = 2.0 / m as f64;
        Self::new((0..=m).map(|k| g0(-1.0 + k as f64 * dx)).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of sample intervals.
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.intervals() as f64
    }

    pub fn left_tail(&self) -> f64 {
        self.samples[0]
    }

    pub fn right_tail(&self) -> f64 {
        self.samples[self.intervals()]
    }

    pub fn g0(&self, x: f64) -> f64 {
        let m = self.intervals();
        if x <= -1.0 {
            return self.left_tail();
        }
        if x >= 1.0 {
            return self.right_tail();
        }
        let pos = (x + 1.0) / self.spacing();
        let k = (pos.floor() as usize).min(m - 1);
        let f = pos - k as f64;
        self.samples[k] * (1.0 - f) + self.samples[k + 1] * f
    }

    pub fn eval(&self, x: f64) -> f64 {
        x + self.g0(x)
    }

    /// Largest power-of-two block of sample intervals whose width is at most
    /// `h_max` (at least one interval).
    fn block_for(&self, h_max: f64) -> usize {
        let m = self.intervals();
        let mut step = 1;
        while step < m && 2.0 * step as f64 * self.spacing() <= h_max {
            step *= 2;
        }
        step
    }

    /// Increments of `g0` over consecutive blocks of `step` sample intervals.
    fn masses(&self, step: usize) -> Vec<f64> {
        self.samples
            .iter()
            .step_by(step)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect()
    }

    /// Sum over cells meeting `[x - reach r, x + reach r]` of
    /// `int_cell K((x - y) / r) dg0(y)`, where `f` is an antiderivative of `K`.
    /// Returns the sum and the value of `g0` at the left edge of the window.
    fn window_sum(&self, x: f64, r: f64, reach: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let step = self.block_for(r / CELLS_PER_SCALE);
        let h = step as f64 * self.spacing();
        let n_cells = self.intervals() / step;
        let lo = (((x - reach * r + 1.0) / h).floor().max(0.0) as usize).min(n_cells);
        let hi = (((x + reach * r + 1.0) / h).ceil().max(0.0) as usize).min(n_cells);
        let mut sum = 0.0;
        for i in lo..hi {
            let mass = self.samples[(i + 1) * step] - self.samples[i * step];
            if mass == 0.0 {
                continue;
            }
            let a = -1.0 + i as f64 * h;
            sum += mass / h * r * (f((x - a) / r) - f((x - a - h) / r));
        }
        (sum, self.samples[lo * step])
    }
}

/// Dilated Gaussian `psi_t(x) = psi(x/t)/t` and its derivative
/// `psi'_t(x) = psi'(x/t)/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernels {
    t: f64,
}

pub fn gaussian_kernels(t: f64) -> Result<GaussianKernels> {
    check_scale(t)?;
    Ok(GaussianKernels { t })
}

impl GaussianKernels {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn psi(&self, x: f64) -> f64 {
        psi(x / self.t) / self.t
    }

    pub fn dpsi(&self, x: f64) -> f64 {
        let s = x / self.t;
        -s * psi(s) / self.t
    }
}

fn check_scale(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(QcError::Domain(format!("scale t = {t} must be positive")))
    }
}

/// `u(x + it)`.
pub fn fkp_extend(g: &LineFn, x: f64, t: f64) -> Result<C64> {
    check_scale(t)?;
    // Re: psi_t * g0 = g0(-inf) + int Phi((x-y)/t) dg0; antiderivative of Phi is s Phi + psi.
    let (re, base) = g.window_sum(x, t, GAUSSIAN_REACH, |s| s * normal_cdf(s) + psi(s));
    let (im, _) = g.window_sum(x, t, GAUSSIAN_REACH, normal_cdf);
    Ok(C64::new(x + base + re, t + im))
}

/// `(u_x, u_t)`.
pub fn fkp_partials(g: &LineFn, x: f64, t: f64) -> Result<(C64, C64)> {
    check_scale(t)?;
    let r = GAUSSIAN_REACH;
    let (xr, _) = g.window_sum(x, t, r, |s| normal_cdf(s) / t);
    let (xi, _) = g.window_sum(x, t, r, |s| psi(s) / t);
    let (tr, _) = g.window_sum(x, t, r, |s| psi(s) / t);
    let (ti, _) = g.window_sum(x, t, r, |s| (normal_cdf(s) - s * psi(s)) / t);
    Ok((C64::new(1.0 + xr, xi), C64::new(tr, 1.0 + ti)))
}

/// `max(|u_x|, |u_t|)`.
pub fn fkp_gradient(g: &LineFn, x: f64, t: f64) -> Result<f64> {
    let (ux, ut) = fkp_partials(g, x, t)?;
    Ok(ux.norm().max(ut.norm()))
}

pub fn fkp_laplacian(g: &LineFn, x: f64, t: f64) -> Result<C64> {
    check_scale(t)?;
    let t2 = t * t;
    // Kernels (s - s^3) psi / t^2 and (s^4 - 2 s^2 - 1) psi / t^2.
    let (re, _) = g.window_sum(x, t, GAUSSIAN_REACH, |s| (s * s + 1.0) * psi(s) / t2);
    let (im, _) = g.window_sum(x, t, GAUSSIAN_REACH, |s| -s * (s * s + 1.0) * psi(s) / t2);
    Ok(C64::new(re, im))
}

fn dilatation_of(ux: C64, ut: C64) -> f64 {
    let i = C64::new(0.0, 1.0);
    let uz = 0.5 * (ux - i * ut);
    let uzb = 0.5 * (ux + i * ut);
    if uz.norm() == 0.0 {
        f64::INFINITY
    } else {
        uzb.norm() / uz.norm()
    }
}

/// `|u_zbar / u_z|` at `x + it`.
pub fn fkp_dilatation(g: &LineFn, x: f64, t: f64) -> Result<f64> {
    let (ux, ut) = fkp_partials(g, x, t)?;
    Ok(dilatation_of(ux, ut))
}

/// Linear convolution of real cell masses with several complex kernels,
/// sharing one transform of the masses.
struct MassSpectrum {
    n: usize,
    len: usize,
    spectrum: Vec<C64>,
    planner: FftPlanner<f64>,
}

impl MassSpectrum {
    fn new(masses: &[f64], kernel_len: usize) -> Self {
        let n = (masses.len() + kernel_len - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let mut spectrum = vec![C64::new(0.0, 0.0); n];
        for (s, &m) in spectrum.iter_mut().zip(masses) {
            s.re = m;
        }
        planner.plan_fft_forward(n).process(&mut spectrum);
        Self {
            n,
            len: masses.len() + kernel_len - 1,
            spectrum,
            planner,
        }
    }

    fn convolve(&mut self, kernel: &[C64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.n];
        buf[..kernel.len()].copy_from_slice(kernel);
        self.planner.plan_fft_forward(self.n).process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.planner.plan_fft_inverse(self.n).process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.truncate(self.len);
        buf.iter_mut().for_each(|b| *b *= scale);
        buf
    }
}

/// Per-mass weights `w_l` for cell offsets `l = -half..=half`: the effect at a
/// cell centre of unit mass spread uniformly over a cell `l` cells to the left.
fn cell_kernel(
    h: f64,
    r: f64,
    half: usize,
    f_re: impl Fn(f64) -> f64,
    f_im: impl Fn(f64) -> f64,
) -> Vec<C64> {
    (0..=2 * half)
        .map(|k| {
            let l = k as f64 - half as f64;
            let (hi, lo) = ((l + 0.5) * h / r, (l - 0.5) * h / r);
            let c = r / h;
            C64::new(c * (f_re(hi) - f_re(lo)), c * (f_im(hi) - f_im(lo)))
        })
        .collect()
}

/// Growth quantities of the extension at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkpScale {
    pub t: f64,
    /// `sup_x |Delta u(x + it)|`.
    pub laplacian_sup: f64,
    /// `t * sup_x |Delta u|`.
    pub scaled_laplacian: f64,
    /// `sup_x max(|u_x|, |u_t|)`.
    pub gradient_sup: f64,
    /// `gradient_sup / log(e + 1/t)`.
    pub scaled_gradient: f64,
    /// `sup_x |u_zbar / u_z|`.
    pub dilatation_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkpProfile {
    pub scales: Vec<FkpScale>,
    /// max/min of `scaled_laplacian` over the scales.
    pub laplacian_ratio: f64,
    /// max/min of `scaled_gradient` over the scales.
    pub gradient_ratio: f64,
    pub dilatation_sup: f64,
    pub sign_convention: String,
}

/// `max / min`, with `1` for an identically zero profile.
pub fn spread_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Suprema over `x` of the Laplacian, gradient and dilatation of the
/// extension at each scale, sampled at cell centres of width `<= t/64`.
pub fn fkp_scale_profile(g: &LineFn, ts: &[f64]) -> Result<FkpProfile> {
    let mut scales = Vec::with_capacity(ts.len());
    for &t in ts {
        check_scale(t)?;
        let step = g.block_for(t / CELLS_PER_SCALE);
        let h = step as f64 * g.spacing();
        let half = (GAUSSIAN_REACH * t / h).ceil() as usize + 1;
        let t2 = t * t;
        let lap = cell_kernel(
            h,
            t,
            half,
            |s| (s * s + 1.0) * psi(s) / t2,
            |s| -s * (s * s + 1.0) * psi(s) / t2,
        );
        let ux = cell_kernel(h, t, half, |s| normal_cdf(s) / t, |s| psi(s) / t);
        let ut = cell_kernel(
            h,
            t,
            half,
            |s| psi(s) / t,
            |s| (normal_cdf(s) - s * psi(s)) / t,
        );
        let mut spec = MassSpectrum::new(&g.masses(step), lap.len());
        let lap = spec.convolve(&lap);
        let ux = spec.convolve(&ux);
        let ut = spec.convolve(&ut);
        let laplacian_sup = lap.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut gradient_sup: f64 = 1.0;
        let mut dilatation_sup: f64 = 0.0;
        for (a, b) in ux.iter().zip(&ut) {
            let ux = C64::new(1.0 + a.re, a.im);
            let ut = C64::new(b.re, 1.0 + b.im);
            gradient_sup = gradient_sup.max(ux.norm()).max(ut.norm());
            dilatation_sup = dilatation_sup.max(dilatation_of(ux, ut));
        }
        scales.push(FkpScale {
            t,
            laplacian_sup,
            scaled_laplacian: t * laplacian_sup,
            gradient_sup,
            scaled_gradient: gradient_sup / (E + 1.0 / t).ln(),
            dilatation_sup,
        });
    }
    let lap: Vec<f64> = scales.iter().map(|s| s.scaled_laplacian).collect();
    let grad: Vec<f64> = scales.iter().map(|s| s.scaled_gradient).collect();
    Ok(FkpProfile {
        laplacian_ratio: spread_ratio(&lap),
        gradient_ratio: spread_ratio(&grad),
        dilatation_sup: scales.iter().map(|s| s.dilatation_sup).fold(0.0, f64::max),
        scales,
        sign_convention: SIGN_CONVENTION.to_string(),
    })
}

/// `max |g(x+t) + g(x-t) - 2 g(x)| / t` over the sample points and scales.
pub fn zygmund_seminorm(g: &LineFn, xs: &[f64], ts: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for &t in ts {
        for &x in xs {
            // The linear part has vanishing second differences.
            let d = g.g0(x + t) + g.g0(x - t) - 2.0 * g.g0(x);
            best = best.max(d.abs() / t.abs());
        }
    }
    best
}

/// Parameters of the truncated lacunary product
/// `P_N(x) = prod_{j=1..N} (1 + a_j(x) cos(b^j pi x))`.
///
/// Without a cap, `a_j = a` (the classical Riesz product). With a cap `C`,
/// `a_j(x) = a C / (C + a P_{j-1}(x))`, which damps the factors where the
/// partial product is already large; this keeps the density bounded by
/// roughly `C` times the previous level while still concentrating mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszProductParams {
    pub depth: u32,
    pub a: f64,
    pub base: u32,
    pub cap: Option<f64>,
}

impl RieszProductParams {
    pub fn new(depth: u32, a: f64, base: u32) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(QcError::Domain(format!("Riesz coefficient a = {a} outside (0, 1)")));
        }
        if base < 3 {
            return Err(QcError::Domain(format!("frequency base {base} < 3")));
        }
        Ok(Self {
            depth,
            a,
            base,
            cap: None,
        })
    }

    pub fn capped(depth: u32, a: f64, base: u32, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(QcError::Domain(format!("cap {cap} must be positive")));
        }
        Ok(Self {
            cap: Some(cap),
            ..Self::new(depth, a, base)?
        })
    }

    /// The capped product used as the built-in singular Zygmund example:
    /// depth 12, `a = 0.99`, base 3, cap 8.
    pub fn calibrated() -> Self {
        Self {
            depth: 12,
            a: 0.99,
            base: 3,
            cap: Some(8.0),
        }
    }

    /// Highest frequency `sum_j b^j` of the product, in units of `pi`.
    pub fn top_frequency(&self) -> Option<u64> {
        let mut total: u64 = 0;
        let mut p: u64 = 1;
        for _ in 0..self.depth {
            p = p.checked_mul(self.base as u64)?;
            total = total.checked_add(p)?;
        }
        Some(total)
    }

    fn frequency(&self, j: u32) -> i64 {
        (self.base as i64).pow(j)
    }
}

/// `cos(pi * b * num / m)` with the angle reduced exactly modulo `2 pi`.
fn cos_lacunary(b: i64, num: i64, m: i64) -> f64 {
    let k = (b * num).rem_euclid(2 * m);
    (PI * k as f64 / m as f64).cos()
}

/// `g0` is the primitive of the truncated product over `[-1, 1]`, normalized
/// to total mass 1 and constant outside.
///
/// The classical product is a trigonometric polynomial; its primitive is
/// computed exactly from its Fourier coefficients. The capped product is
/// sampled at cell midpoints of the finest grid and summed.
pub fn riesz_product_zygmund(params: RieszProductParams) -> Result<LineFn> {
    if !(params.a > 0.0 && params.a < 1.0) || params.base < 3 {
        return Err(QcError::Domain("invalid Riesz product parameters".into()));
    }
    match params.cap {
        None => classical_riesz(params),
        Some(cap) => capped_riesz(params, cap),
    }
}

fn classical_riesz(params: RieszProductParams) -> Result<LineFn> {
    let top = params
        .top_frequency()
        .filter(|&k| k < 1 << (MAX_SAMPLES_LOG2 - 1))
        .ok_or_else(|| {
            QcError::Configuration(format!(
                "Riesz depth {} with base {} exceeds 2^{MAX_SAMPLES_LOG2} samples",
                params.depth, params.base
            ))
        })?;
    let m = ((2 * top + 2) as usize).next_power_of_two().max(1 << 16);
    let mi = m as i64;
    // x_k = -1 + 2k/m, so b^j pi x_k = pi b^j (2k - m) / m.
    let mut buf: Vec<C64> = (0..mi)
        .map(|k| {
            let p = (1..=params.depth)
                .map(|j| 1.0 + params.a * cos_lacunary(params.frequency(j), 2 * k - mi, mi))
                .product();
            C64::new(p, 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let c0 = buf[0].re / m as f64;
    // The DFT coefficient of index n is c_n (-1)^n, where P = sum c_n e^{i pi n x}.
    // With d_n = c_n (-1)^n / (i pi n): G(x_k) = c0 (x_k + 1) + sum_n d_n (e^{2 pi i n k/m} - 1).
    let mut d = vec![C64::new(0.0, 0.0); m];
    let mut d_sum = C64::new(0.0, 0.0);
    for (idx, c) in buf.iter().enumerate().skip(1) {
        let n = if idx < m / 2 {
            idx as i64
        } else {
            idx as i64 - mi
        };
        if idx == m / 2 {
            continue;
        }
        d[idx] = c / m as f64 / C64::new(0.0, PI * n as f64);
        d_sum += d[idx];
    }
    planner.plan_fft_inverse(m).process(&mut d);
    let total = 2.0 * c0;
    let mut samples: Vec<f64> = (0..m)
        .map(|k| (c0 * 2.0 * k as f64 / m as f64 + (d[k] - d_sum).re) / total)
        .collect();
    samples[0] = 0.0;
    samples.push(1.0);
    LineFn::new(samples)
}

fn capped_riesz(params: RieszProductParams, cap: f64) -> Result<LineFn> {
    let m = 1usize << MAX_SAMPLES_LOG2;
    let mi = m as i64;
    let mut density = vec![1.0f64; m];
    for j in 1..=params.depth {
        let b = params.frequency(j);
        for (k, p) in density.iter_mut().enumerate() {
            // Midpoint x = -1 + (2k + 1)/m.
            let a = params.a * cap / (cap + params.a * *p);
            *p *= 1.0 + a * cos_lacunary(b, 2 * k as i64 + 1 - mi, mi);
        }
    }
    let mut samples = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    samples.push(0.0);
    for p in &density {
        acc += p;
        samples.push(acc);
    }
    samples.iter_mut().for_each(|s| *s /= acc);
    samples[m] = 1.0;
    LineFn::new(samples)
}

/// The mollifier `phi(y) = (315/256) (1 - y^2)^4` on `[-1, 1]`.
pub fn mollifier(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        315.0 / 256.0 * (1.0 - y * y).powi(4)
    }
}

fn mollifier_cdf(y: f64) -> f64 {
    let y = y.clamp(-1.0, 1.0);
    let y2 = y * y;
    let p = y * (1.0 + y2 * (-4.0 / 3.0 + y2 * (6.0 / 5.0 + y2 * (-4.0 / 7.0 + y2 / 9.0))));
    0.5 + 315.0 / 256.0 * p
}

/// `int_{-1}^y Phi_phi - max(y, 0)`, supported in `[-1, 1]`.
fn mollifier_cdf_primitive_centered(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let q = |u: f64| {
        let u2 = u * u;
        u2 * (0.5 + u2 * (-1.0 / 3.0 + u2 * (0.2 + u2 * (-1.0 / 14.0 + u2 / 90.0))))
    };
    (y + 1.0) / 2.0 + 315.0 / 256.0 * (q(y) - q(1.0)) - y.max(0.0)
}

/// `g = sum_j g_j` with `g_0 = phi_1 * g`, `g_j = (phi_{2^-j} - phi_{2^-j+1}) * g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicDecomposition {
    pub levels: u32,
    /// Sample points covering `[-2, 2]`.
    pub xs: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
    /// `(|g_j|_inf, |g_j'|_inf, |g_j''|_inf)` on `[-2, 2]`.
    pub norms: Vec<[f64; 3]>,
    /// `sup |sum_j g_j - g|` on `[-2, 2]`.
    pub reconstruction_error: f64,
    /// Smallest `C` with `|g_j| <= C 2^-j`, `|g_j'| <= C`, `|g_j''| <= C 2^j`.
    pub constant: f64,
}

impl DyadicDecomposition {
    /// Least-squares slopes of `log2 |g_j|_inf` and `log2 |g_j''|_inf` against
    /// `j` over `j in range`; `None` if some norm vanishes.
    pub fn fitted_exponents(&self, range: std::ops::RangeInclusive<u32>) -> Option<(f64, f64)> {
        let pts: Vec<(f64, [f64; 3])> = range
            .filter(|&j| (j as usize) < self.norms.len())
            .map(|j| (j as f64, self.norms[j as usize]))
            .collect();
        if pts.len() < 2 || pts.iter().any(|(_, n)| n[0] <= 0.0 || n[2] <= 0.0) {
            return None;
        }
        let slope = |idx: usize| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1[idx].log2()).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1[idx].log2() - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        };
        Some((slope(0), slope(2)))
    }
}

pub fn dyadic_decompose(g: &LineFn, levels: u32) -> Result<DyadicDecomposition> {
    if levels > 16 {
        return Err(QcError::Configuration(format!("dyadic depth {levels} > 16")));
    }
    let finest = 0.5f64.powi(levels as i32);
    let step = g.block_for(finest / CELLS_PER_SCALE);
    let h = step as f64 * g.spacing();
    let masses = g.masses(step);
    // Common output grid: cell centres shifted by up to one unit either side.
    let half = (1.0 / h).ceil() as usize + 1;
    let mut spec = MassSpectrum::new(&masses, 2 * half + 1);
    let x_of = |k: usize| -1.0 + 0.5 * h + (k as f64 - half as f64) * h;
    let n_out = masses.len() + 2 * half;
    let keep: Vec<usize> = (0..n_out).filter(|&k| x_of(k).abs() <= 2.0).collect();
    let xs: Vec<f64> = keep.iter().map(|&k| x_of(k)).collect();

    // Per radius: (phi_r * g - g, (phi_r * g0)', (phi_r * g0)'') at the kept points.
    let mut smoothed: Vec<[Vec<f64>; 3]> = Vec::with_capacity(levels as usize + 1);
    for j in 0..=levels {
        let r = 0.5f64.powi(j as i32);
        let vd = cell_kernel(h, r, half, mollifier_cdf_primitive_centered, |s| {
            mollifier_cdf(s) / r
        });
        let d2 = cell_kernel(h, r, half, |s| mollifier(s) / (r * r), |_| 0.0);
        let vd = spec.convolve(&vd);
        let d2 = spec.convolve(&d2);
        smoothed.push([
            keep.iter().map(|&k| vd[k].re).collect(),
            keep.iter().map(|&k| vd[k].im).collect(),
            keep.iter().map(|&k| d2[k].re).collect(),
        ]);
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut pieces = Vec::with_capacity(levels as usize + 1);
    let mut norms = Vec::with_capacity(levels as usize + 1);
    for j in 0..=levels as usize {
        let (value, d1, d2): (Vec<f64>, Vec<f64>, Vec<f64>) = if j == 0 {
            let s = &smoothed[0];
            (
                xs.iter().zip(&s[0]).map(|(&x, v)| g.eval(x) + v).collect(),
                s[1].iter().map(|v| 1.0 + v).collect(),
                s[2].clone(),
            )
        } else {
            let (a, b) = (&smoothed[j], &smoothed[j - 1]);
            let diff = |i: usize| a[i].iter().zip(&b[i]).map(|(p, q)| p - q).collect();
            (diff(0), diff(1), diff(2))
        };
        norms.push([sup(&value), sup(&d1), sup(&d2)]);
        pieces.push(value);
    }
    let reconstruction_error = sup(&smoothed[levels as usize][0]);
    let constant = norms
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let s = 2f64.powi(j as i32);
            (n[0] * s).max(n[1]).max(n[2] / s)
        })
        .fold(0.0, f64::max);
    Ok(DyadicDecomposition {
        levels,
        xs,
        pieces,
        norms,
        reconstruction_error,
        constant,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZygmundConvolutionReport {
    pub ts: Vec<f64>,
    /// `t * sup_x |(phi_t * g)''(x)|`.
    pub profile: Vec<f64>,
    pub ratio: f64,
    pub bounded: bool,
}

/// Profile of `t |(phi_t * g)''|_inf` with the fixed mollifier `phi`;
/// `bounded` when max/min over the scales is at most 10.
pub fn zygmund_convolution_estimate_check(g: &LineFn, ts: &[f64]) -> Result<ZygmundConvolutionReport> {
    let mut profile = Vec::with_capacity(ts.len());
    for &t in ts {
        check_scale(t)?;
        let step = g.block_for(t / CELLS_PER_SCALE);
        let h = step as f64 * g.spacing();
        let half = (t / h).ceil() as usize + 1;
        let kernel = cell_kernel(h, t, half, |s| mollifier(s) / (t * t), |_| 0.0);
        let mut spec = MassSpectrum::new(&g.masses(step), kernel.len());
        let sup = spec
            .convolve(&kernel)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.re.abs()));
        profile.push(t * sup);
    }
    let ratio = spread_ratio(&profile);
    Ok(ZygmundConvolutionReport {
        ts: ts.to_vec(),
        profile,
        ratio,
        bounded: ratio <= 10.0,
    })
}
