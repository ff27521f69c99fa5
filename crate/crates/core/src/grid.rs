//! Discretizations of the closed unit disc (polar, Chebyshev in `r`, uniform
//! in `theta`) and of planar squares (uniform Cartesian, FFT-sized), sampled
//! complex fields on them, and the quadrature/derivative machinery shared by
//! the rest of the crate.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QcError, Result};

pub type C64 = Complex64;

/// Node set with positive area weights.
pub trait Grid {
    fn len(&self) -> usize;
    fn weight(&self, i: usize) -> f64;
    fn point(&self, i: usize) -> C64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Five-point finite-difference stencil on the radial nodes.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    start: usize,
    w: [f64; 5],
}

/// Polar grid on the unit disc.
///
/// Radial nodes are Chebyshev-Gauss points of `[0, 1]` (clustered at both ends),
/// angular nodes are `2 pi j / n_theta`. Nodes are stored ring by ring:
/// index `ir * n_theta + jt`.
pub struct DiscGrid {
    n_r: usize,
    n_theta: usize,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    bary: Vec<f64>,
    angles: Vec<f64>,
    weights: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl DiscGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 5 {
            return Err(QcError::Configuration(format!("n_r = {n_r} < 5")));
        }
        if n_theta < 4 || n_theta % 2 != 0 {
            return Err(QcError::Configuration(format!(
                "n_theta = {n_theta} must be even and >= 4"
            )));
        }
        let nodes: Vec<f64> = (0..n_r)
            .map(|k| (2 * k + 1) as f64 * PI / (2 * n_r) as f64)
            .collect();
        let radii: Vec<f64> = nodes.iter().map(|t| 0.5 * (1.0 - t.cos())).collect();
        // Fejer's first rule on [-1, 1], halved for [0, 1].
        let radial_weights: Vec<f64> = nodes
            .iter()
            .map(|&t| {
                let mut s = 0.0;
                for j in 1..=n_r / 2 {
                    let jf = j as f64;
                    s += (2.0 * jf * t).cos() / (4.0 * jf * jf - 1.0);
                }
                (1.0 - 2.0 * s) / n_r as f64
            })
            .collect();
        let bary: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(k, t)| if k % 2 == 0 { t.sin() } else { -t.sin() })
            .collect();
        let angles: Vec<f64> = (0..n_theta)
            .map(|j| 2.0 * PI * j as f64 / n_theta as f64)
            .collect();
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (r, wr) in radii.iter().zip(&radial_weights) {
            for _ in 0..n_theta {
                weights.push(wr * r * dtheta);
            }
        }
        let stencil = |order: usize| -> Vec<Stencil> {
            (0..n_r)
                .map(|i| {
                    let start = i.saturating_sub(2).min(n_r - 5);
                    let xs = &radii[start..start + 5];
                    let all = fornberg_weights(radii[i], xs, 2);
                    let mut w = [0.0; 5];
                    w.copy_from_slice(&all[order]);
                    Stencil { start, w }
                })
                .collect()
        };
        let d1 = stencil(1);
        let d2 = stencil(2);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_theta);
        let ifft = planner.plan_fft_inverse(n_theta);
        Ok(Self {
            n_r,
            n_theta,
            radii,
            radial_weights,
            bary,
            angles,
            weights,
            d1,
            d2,
            fft,
            ifft,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Quadrature weights for `int_0^1 f(r) dr` on the radial nodes.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, ir: usize, jt: usize) -> usize {
        ir * self.n_theta + jt
    }

    /// Signed integer frequency of FFT bin `k` (Nyquist bin reported as `-n/2`).
    pub fn frequency(&self, k: usize) -> i64 {
        signed_frequency(k, self.n_theta)
    }

    /// Forward DFT of each ring, normalized so that bin `k` holds the Fourier
    /// coefficient of `e^{i n_k theta}`.
    pub fn angular_coefficients(&self, values: &[C64]) -> Vec<Vec<C64>> {
        let scale = 1.0 / self.n_theta as f64;
        values
            .chunks(self.n_theta)
            .map(|ring| {
                let mut buf = ring.to_vec();
                self.fft.process(&mut buf);
                buf.iter_mut().for_each(|c| *c *= scale);
                buf
            })
            .collect()
    }

    pub fn forward_ring(&self, buf: &mut [C64]) {
        self.fft.process(buf);
        let scale = 1.0 / self.n_theta as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Inverse of [`DiscGrid::forward_ring`].
    pub fn inverse_ring(&self, buf: &mut [C64]) {
        self.ifft.process(buf);
    }

    /// `d/dtheta` and `d^2/dtheta^2` of one ring by Fourier differentiation.
    ///
    /// Real and imaginary parts are differentiated separately so that real
    /// input gives exactly real output.
    pub fn ring_derivatives(&self, ring: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.n_theta;
        let mut d1 = vec![C64::new(0.0, 0.0); n];
        let mut d2 = d1.clone();
        for part in 0..2 {
            let comp = |v: &C64| if part == 0 { v.re } else { v.im };
            if ring.iter().all(|v| comp(v) == 0.0) {
                continue;
            }
            let base = comp(&ring[0]);
            let mut b2: Vec<C64> = ring.iter().map(|v| C64::new(comp(v) - base, 0.0)).collect();
            self.forward_ring(&mut b2);
            let mut b1 = b2.clone();
            for (k, (a, b)) in b1.iter_mut().zip(b2.iter_mut()).enumerate() {
                let m = signed_frequency(k, n) as f64;
                if 2 * k == n {
                    *a = C64::new(0.0, 0.0);
                } else {
                    *a *= C64::new(0.0, m);
                }
                *b *= -m * m;
            }
            self.inverse_ring(&mut b1);
            self.inverse_ring(&mut b2);
            let unit = if part == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
            for j in 0..n {
                d1[j] += unit * b1[j].re;
                d2[j] += unit * b2[j].re;
            }
        }
        (d1, d2)
    }

    fn radial_apply(&self, st: &Stencil, values: &[C64], ir: usize, jt: usize) -> C64 {
        let center = values[self.index(ir, jt)];
        let mut acc = C64::new(0.0, 0.0);
        for (s, w) in st.w.iter().enumerate() {
            acc += (values[self.index(st.start + s, jt)] - center) * *w;
        }
        acc
    }

    /// Partial derivatives in polar coordinates: `(f_r, f_theta, f_rr, f_thetatheta)`.
    fn polar_derivatives(&self, values: &[C64]) -> [Vec<C64>; 4] {
        let n = self.n_r * self.n_theta;
        let mut fr = vec![C64::new(0.0, 0.0); n];
        let mut frr = fr.clone();
        let mut ft = fr.clone();
        let mut ftt = fr.clone();
        for ir in 0..self.n_r {
            let off = ir * self.n_theta;
            let (a, b) = self.ring_derivatives(&values[off..off + self.n_theta]);
            ft[off..off + self.n_theta].copy_from_slice(&a);
            ftt[off..off + self.n_theta].copy_from_slice(&b);
            for jt in 0..self.n_theta {
                fr[off + jt] = self.radial_apply(&self.d1[ir], values, ir, jt);
                frr[off + jt] = self.radial_apply(&self.d2[ir], values, ir, jt);
            }
        }
        [fr, ft, frr, ftt]
    }

    /// Barycentric interpolation weights at radius `r` for the radial nodes.
    pub fn radial_interpolation_weights(&self, r: f64) -> Vec<f64> {
        if let Some(k) = self.radii.iter().position(|&x| x == r) {
            let mut e = vec![0.0; self.n_r];
            e[k] = 1.0;
            return e;
        }
        let terms: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.bary)
            .map(|(x, b)| b / (r - x))
            .collect();
        let total: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / total).collect()
    }

    /// Values of a sampled field on the circle `|z| = r`, by polynomial
    /// interpolation in `r` along each angular column.
    pub fn ring_at(&self, values: &[C64], r: f64) -> Vec<C64> {
        let w = self.radial_interpolation_weights(r);
        (0..self.n_theta)
            .map(|jt| {
                w.iter()
                    .enumerate()
                    .map(|(ir, wk)| values[self.index(ir, jt)] * *wk)
                    .sum()
            })
            .collect()
    }
}

impl Grid for DiscGrid {
    fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    fn point(&self, i: usize) -> C64 {
        let r = self.radii[i / self.n_theta];
        let t = self.angles[i % self.n_theta];
        C64::from_polar(r, t)
    }
}

/// Uniform `n x n` grid on `[-R, R)^2`, periodic for FFT purposes.
/// Node `(i, j)` sits at `x = -R + j h`, `y = -R + i h`, index `i * n + j`.
pub struct SquareGrid {
    half_width: f64,
    n: usize,
    h: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SquareGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SquareGrid")
            .field("half_width", &self.half_width)
            .field("n", &self.n)
            .finish()
    }
}

impl SquareGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(QcError::Configuration(format!(
                "half width {half_width} must be positive"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(QcError::Configuration(format!(
                "n = {n} must be a power of two >= 8"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_width,
            n,
            h: 2.0 * half_width / n as f64,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h
    }

    /// Angular frequency of FFT bin `k` along one axis.
    pub fn frequency(&self, k: usize) -> f64 {
        PI * signed_frequency(k, self.n) as f64 / self.half_width
    }

    /// In-place unnormalized 2-D DFT (rows, then columns).
    pub fn fft2(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.ifft } else { &self.fft };
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
        if inverse {
            let s = 1.0 / (n * n) as f64;
            data.iter_mut().for_each(|c| *c *= s);
        }
    }

    /// Applies a Fourier multiplier `m(xi)` with `xi = xi_1 + i xi_2`.
    pub fn apply_multiplier(&self, values: &[C64], m: impl Fn(C64) -> C64) -> Vec<C64> {
        let n = self.n;
        let mut buf = values.to_vec();
        self.fft2(&mut buf, false);
        for i in 0..n {
            let eta = self.frequency(i);
            for j in 0..n {
                buf[i * n + j] *= m(C64::new(self.frequency(j), eta));
            }
        }
        self.fft2(&mut buf, true);
        buf
    }

    /// Cubic Lagrange (4 x 4) interpolation; `None` outside the node hull.
    pub fn interpolate(&self, values: &[C64], z: C64) -> Option<C64> {
        let n = self.n;
        let fx = (z.re + self.half_width) / self.h;
        let fy = (z.im + self.half_width) / self.h;
        let last = (n - 1) as f64;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= last && fy <= last) {
            return None;
        }
        let (jx, wx) = cubic_weights(fx, n);
        let (iy, wy) = cubic_weights(fy, n);
        let mut acc = C64::new(0.0, 0.0);
        for (a, wya) in wy.iter().enumerate() {
            let row = (iy + a) * n;
            for (b, wxb) in wx.iter().enumerate() {
                acc += values[row + jx + b] * (wya * wxb);
            }
        }
        Some(acc)
    }
}

impl Grid for SquareGrid {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn weight(&self, _i: usize) -> f64 {
        self.h * self.h
    }

    fn point(&self, i: usize) -> C64 {
        C64::new(self.coordinate(i % self.n), self.coordinate(i / self.n))
    }
}

fn cubic_weights(f: f64, n: usize) -> (usize, [f64; 4]) {
    let base = (f.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let t = f - base as f64;
    let mut w = [1.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        for m in 0..4 {
            if m != k {
                *wk *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
    }
    (base, w)
}

pub(crate) fn signed_frequency(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Finite-difference weights for derivatives `0..=order` at `x0` (Fornberg).
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = t;
            }
            dp = m as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|wi| wi * h).collect(),
    )
}

/// Complex samples on a grid.
#[derive(Debug)]
pub struct Field<G> {
    grid: Arc<G>,
    values: Vec<C64>,
}

impl<G> Clone for Field<G> {
    fn clone(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.clone(),
        }
    }
}

impl<G: Grid> Field<G> {
    pub fn new(grid: Arc<G>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QcError::Configuration(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<G>, f: impl Fn(C64) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<G>, c: C64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<G>) -> Self {
        Self::constant(grid, C64::new(0.0, 0.0))
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Maps with access to the node position: `f(z, value)`.
    pub fn map_at(&self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| f(self.grid.point(i), *v))
                .collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "grid mismatch");
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl<G: Grid> Add for &Field<G> {
    type Output = Field<G>;
    fn add(self, rhs: Self) -> Field<G> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<G: Grid> Sub for &Field<G> {
    type Output = Field<G>;
    fn sub(self, rhs: Self) -> Field<G> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<G: Grid> Mul<f64> for &Field<G> {
    type Output = Field<G>;
    fn mul(self, rhs: f64) -> Field<G> {
        self.map(|a| a * rhs)
    }
}

/// Quadrature `L^p` norm; `p = f64::INFINITY` gives the nodal maximum.
pub fn lp_norm<G: Grid>(f: &Field<G>, p: f64) -> Result<f64> {
    lp_norm_where(f, p, |_| true)
}

/// [`lp_norm`] restricted to nodes whose position satisfies `keep`.
pub fn lp_norm_where<G: Grid>(f: &Field<G>, p: f64, keep: impl Fn(C64) -> bool) -> Result<f64> {
    if !f.is_finite() {
        return Err(QcError::NonFiniteField);
    }
    if !(p >= 1.0) {
        return Err(QcError::Domain(format!("L^p exponent {p} < 1")));
    }
    let grid = f.grid();
    if p.is_infinite() {
        return Ok(f
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(grid.point(*i)))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max));
    }
    let sum: f64 = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(grid.point(*i)))
        .map(|(i, v)| grid.weight(i) * v.norm().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

fn check_disc_field(f: &Field<DiscGrid>) -> Result<()> {
    if !f.is_finite() {
        return Err(QcError::NonFiniteField);
    }
    if f.grid().n_theta() % 2 != 0 {
        return Err(QcError::Configuration("n_theta must be even".into()));
    }
    Ok(())
}

/// Wirtinger derivatives `(f_z, f_zbar)`: Fourier differentiation in `theta`,
/// five-point finite differences in `r`.
pub fn gradient(f: &Field<DiscGrid>) -> Result<(Field<DiscGrid>, Field<DiscGrid>)> {
    check_disc_field(f)?;
    let grid = f.grid();
    let [fr, ft, _, _] = grid.polar_derivatives(f.values());
    let mut fz = Vec::with_capacity(grid.len());
    let mut fzb = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let z = grid.point(i);
        let r = z.norm();
        let e = z / r;
        let angular = C64::new(0.0, 1.0) * ft[i] / r;
        fz.push(0.5 * e.conj() * (fr[i] - angular));
        fzb.push(0.5 * e * (fr[i] + angular));
    }
    Ok((
        Field::new(Arc::clone(grid), fz)?,
        Field::new(Arc::clone(grid), fzb)?,
    ))
}

/// `|f_z| + |f_zbar|` nodewise.
pub fn gradient_modulus(f: &Field<DiscGrid>) -> Result<Field<DiscGrid>> {
    let (fz, fzb) = gradient(f)?;
    Ok(fz.zip_with(&fzb, |a, b| C64::new(a.norm() + b.norm(), 0.0)))
}

/// Polar-form Laplacian `f_rr + f_r / r + f_thetatheta / r^2`.
pub fn laplacian_fd(f: &Field<DiscGrid>) -> Result<Field<DiscGrid>> {
    check_disc_field(f)?;
    let grid = f.grid();
    let [fr, _, frr, ftt] = grid.polar_derivatives(f.values());
    let values = (0..grid.len())
        .map(|i| {
            let r = grid.radii()[i / grid.n_theta()];
            frr[i] + fr[i] / r + ftt[i] / (r * r)
        })
        .collect();
    Field::new(Arc::clone(grid), values)
}

/// Samples a square-grid field at the nodes of a disc grid.
pub fn resample_to_disc(
    f: &Field<SquareGrid>,
    disc: &Arc<DiscGrid>,
) -> Result<Field<DiscGrid>> {
    let sq = f.grid();
    let values = (0..disc.len())
        .map(|i| {
            sq.interpolate(f.values(), disc.point(i))
                .ok_or_else(|| QcError::Configuration("disc node outside square grid".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(Arc::clone(disc), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(n_r: usize, n_t: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(n_r, n_t).unwrap())
    }

    fn max_err(a: &Field<DiscGrid>, f: impl Fn(C64) -> C64) -> f64 {
        a.values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - f(a.grid().point(i))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn weights_sum_to_disc_area() {
        for (nr, nt) in [(8, 8), (64, 128), (128, 256)] {
            let g = disc(nr, nt);
            let s: f64 = g.weights().iter().sum();
            assert!((s - PI).abs() <= 1e-6 * PI, "{s}");
            assert!(g.weights().iter().all(|w| *w > 0.0));
            assert!(g.radii().windows(2).all(|w| w[0] < w[1]));
            assert!(*g.radii().last().unwrap() < 1.0);
        }
    }

    #[test]
    fn odd_angular_count_rejected() {
        assert!(matches!(
            DiscGrid::new(16, 33),
            Err(QcError::Configuration(_))
        ));
    }

    #[test]
    fn lp_norm_examples() {
        let g = disc(64, 64);
        let one = Field::constant(&g, C64::new(1.0, 0.0));
        assert!((lp_norm(&one, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let zero = Field::zeros(&g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&zero, p).unwrap(), 0.0);
        }
        let id = Field::from_fn(&g, |z| z);
        assert!((lp_norm(&id, 2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-12);
        let mut bad = one.clone();
        bad.values_mut()[3] = C64::new(f64::NAN, 0.0);
        assert_eq!(lp_norm(&bad, 2.0), Err(QcError::NonFiniteField));
    }

    #[test]
    fn radial_polynomial_quadrature_is_exact() {
        let g = disc(128, 16);
        // int_D |z|^{2m} dA = 2 pi / (2m + 2)
        for m in 1..6 {
            let f = Field::from_fn(&g, |z| C64::new(z.norm().powi(2 * m), 0.0));
            let got = lp_norm(&f, 1.0).unwrap();
            let exact = 2.0 * PI / (2 * m + 2) as f64;
            assert!((got - exact).abs() <= 1e-6 * exact);
        }
    }

    #[test]
    fn gradient_of_basic_maps() {
        let g = disc(32, 64);
        let (fz, fzb) = gradient(&Field::from_fn(&g, |z| z)).unwrap();
        assert!(max_err(&fz, |_| C64::new(1.0, 0.0)) < 1e-9);
        assert!(max_err(&fzb, |_| C64::new(0.0, 0.0)) < 1e-9);
        let (fz, fzb) = gradient(&Field::from_fn(&g, |z| z.conj())).unwrap();
        assert!(max_err(&fz, |_| C64::new(0.0, 0.0)) < 1e-9);
        assert!(max_err(&fzb, |_| C64::new(1.0, 0.0)) < 1e-9);
    }

    #[test]
    fn gradient_of_modulus_squared() {
        let g = disc(128, 256);
        let (fz, fzb) = gradient(&Field::from_fn(&g, |z| C64::new(z.norm_sqr(), 0.0))).unwrap();
        assert!(max_err(&fz, |z| z.conj()) <= 1e-6);
        assert!(max_err(&fzb, |z| z) <= 1e-6);
    }

    #[test]
    fn gradient_of_constant_is_exactly_zero() {
        let g = disc(24, 32);
        let (fz, fzb) = gradient(&Field::constant(&g, C64::new(0.37, -1.3))).unwrap();
        assert!(fz.values().iter().all(|v| *v == C64::new(0.0, 0.0)));
        assert!(fzb.values().iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn laplacian_examples() {
        let g = disc(128, 256);
        let lap = laplacian_fd(&Field::from_fn(&g, |z| C64::new(z.norm_sqr(), 0.0))).unwrap();
        assert!(max_err(&lap, |_| C64::new(4.0, 0.0)) <= 1e-6);
        let lap = laplacian_fd(&Field::from_fn(&g, |z| C64::new((z * z * z).re, 0.0))).unwrap();
        assert!(max_err(&lap, |_| C64::new(0.0, 0.0)) <= 1e-6);
    }

    #[test]
    fn laplacian_of_real_field_is_real() {
        let g = disc(64, 128);
        let f = Field::from_fn(&g, |z| C64::new((z.re * 3.0).sin() * (1.0 + z.im * z.im), 0.0));
        let lap = laplacian_fd(&f).unwrap();
        let scale = lap.max_abs();
        for v in lap.values() {
            assert!(v.im.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn ring_interpolation_reproduces_polynomials() {
        let g = disc(32, 16);
        let f = Field::from_fn(&g, |z| z * z * z + z.conj());
        let ring = g.ring_at(f.values(), 1.0);
        for (j, v) in ring.iter().enumerate() {
            let z = C64::from_polar(1.0, g.angles()[j]);
            assert!((v - (z * z * z + z.conj())).norm() < 1e-10);
        }
    }

    #[test]
    fn square_grid_interpolation_and_fft() {
        let sq = Arc::new(SquareGrid::new(2.0, 64).unwrap());
        assert!(SquareGrid::new(2.0, 48).is_err());
        let f = Field::from_fn(&sq, |z| z * z + z.conj());
        let p = C64::new(0.313, -0.77);
        let v = sq.interpolate(f.values(), p).unwrap();
        assert!((v - (p * p + p.conj())).norm() < 1e-12);
        assert!(sq.interpolate(f.values(), C64::new(2.5, 0.0)).is_none());
        let back = sq.apply_multiplier(f.values(), |_| C64::new(1.0, 0.0));
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre_on(m, 0.0, 2.0);
            for d in 0..(2 * m).min(20) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = 2f64.powi(d as i32 + 1) / (d + 1) as f64;
                assert!((got - exact).abs() < 1e-12 * exact, "m={m} d={d}");
            }
        }
    }

    #[test]
    fn fornberg_recovers_quadratic_derivatives() {
        let xs = [0.0, 0.1, 0.25, 0.3, 0.6];
        let w = fornberg_weights(0.25, &xs, 2);
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 - 0.5).abs() < 1e-10);
        assert!((d2 - 6.0).abs() < 1e-9);
    }
}
