//! Python bindings for a few `qclab` entry points: the `w0` example, the disc
//! Green function, the exponent bootstrap and the half-plane extension profile.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qclab::composite::bootstrap_exponents;
use qclab::greenpoisson::{green_kernel, green_kernel_gradient_norm, poisson_extend, CircleFn};
use qclab::halfplane::{fkp_scale_profile, riesz_product_zygmund, LineFn, RieszProductParams};
use qclab::maps::{w0_dilatation_check, w0_eval, W0Params};
use qclab::{DiscGrid, QcError, C64};

fn to_py(e: QcError) -> PyErr {
    match e {
        QcError::Configuration(_) | QcError::Domain(_) | QcError::ExponentOutOfRange => {
            PyValueError::new_err(e.to_string())
        }
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn w0_params(a: f64) -> PyResult<W0Params> {
    W0Params::new(a).map_err(to_py)
}

/// `w0(z) = z log^a(e / |z|^2)`.
#[pyfunction]
fn w0(z: C64, a: f64) -> PyResult<C64> {
    Ok(w0_eval(z, w0_params(a)?))
}

/// Sup of the dilatation of `w0` on an `n_r x n_theta` polar grid, and its bound `a / (1 - a)`.
#[pyfunction]
#[pyo3(signature = (a, n_r=256, n_theta=512))]
fn w0_dilatation(a: f64, n_r: usize, n_theta: usize) -> PyResult<(f64, f64)> {
    let grid = DiscGrid::new(n_r, n_theta).map_err(to_py)?;
    let c = w0_dilatation_check(w0_params(a)?, &grid).map_err(to_py)?;
    Ok((c.sup_mu, c.bound))
}

#[pyfunction]
fn green(z: C64, w: C64) -> PyResult<f64> {
    green_kernel(z, w).map_err(to_py)
}

#[pyfunction]
fn green_gradient_norm(z: C64, w: C64) -> PyResult<f64> {
    green_kernel_gradient_norm(z, w).map_err(to_py)
}

/// Harmonic extension of boundary samples at `theta_k = 2 pi k / n`:
/// `(radii, rows)` with one row of `n` values per radius.
#[pyfunction]
fn harmonic_extension(boundary: Vec<C64>, n_r: usize) -> PyResult<(Vec<f64>, Vec<Vec<C64>>)> {
    let n_theta = boundary.len();
    let grid = Arc::new(DiscGrid::new(n_r, n_theta).map_err(to_py)?);
    let b = CircleFn::new(boundary).map_err(to_py)?;
    let u = poisson_extend(&b, &grid).map_err(to_py)?;
    let rows = u.values().chunks(n_theta).map(|row| row.to_vec()).collect();
    Ok((grid.radii().to_vec(), rows))
}

/// Exponent ledger: `(sequence, k0)`.
#[pyfunction]
fn bootstrap(q0: f64) -> PyResult<(Vec<f64>, usize)> {
    let l = bootstrap_exponents(q0).map_err(to_py)?;
    Ok((l.sequence, l.k0))
}

/// Growth profile of the half-plane extension of a Riesz-product boundary map.
/// `cap=None` gives the classical product; the defaults are the calibrated one.
#[pyfunction]
#[pyo3(signature = (ts, depth=12, a=0.99, base=3, cap=Some(8.0)))]
fn riesz_profile<'py>(
    py: Python<'py>,
    ts: Vec<f64>,
    depth: u32,
    a: f64,
    base: u32,
    cap: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let params = match cap {
        Some(c) => RieszProductParams::capped(depth, a, base, c),
        None => RieszProductParams::new(depth, a, base),
    }
    .map_err(to_py)?;
    let g = py.allow_threads(|| riesz_product_zygmund(params)).map_err(to_py)?;
    profile_dict(py, &g, &ts)
}

/// Growth profile for `g(x) = x + g0(x)` sampled at `2^log2_m + 1` points of `[-1, 1]`.
#[pyfunction]
fn line_profile<'py>(py: Python<'py>, g0: Vec<f64>, ts: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let g = LineFn::new(g0).map_err(to_py)?;
    profile_dict(py, &g, &ts)
}

fn profile_dict<'py>(py: Python<'py>, g: &LineFn, ts: &[f64]) -> PyResult<Bound<'py, PyDict>> {
    let p = py.allow_threads(|| fkp_scale_profile(g, ts)).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("t", p.scales.iter().map(|s| s.t).collect::<Vec<_>>())?;
    d.set_item("scaled_laplacian", p.scales.iter().map(|s| s.scaled_laplacian).collect::<Vec<_>>())?;
    d.set_item("scaled_gradient", p.scales.iter().map(|s| s.scaled_gradient).collect::<Vec<_>>())?;
    d.set_item("laplacian_ratio", p.laplacian_ratio)?;
    d.set_item("gradient_ratio", p.gradient_ratio)?;
    d.set_item("dilatation_sup", p.dilatation_sup)?;
    Ok(d)
}

#[pymodule]
fn qclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(w0, m)?)?;
    m.add_function(wrap_pyfunction!(w0_dilatation, m)?)?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(green_gradient_norm, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_extension, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_profile, m)?)?;
    m.add_function(wrap_pyfunction!(line_profile, m)?)?;
    Ok(())
}
