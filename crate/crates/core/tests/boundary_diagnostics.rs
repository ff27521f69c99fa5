use std::f64::consts::PI;
use std::sync::Arc;

use qclab::beltrami::{bump, principal_solve, BeltramiProblem, DEFAULT_MAX_TERMS, DEFAULT_TOL};
use qclab::diagnostics::*;
use qclab::greenpoisson::{poisson_extend, solve_poisson, CircleFn};
use qclab::grid::{gradient, resample_to_disc};
use qclab::maps::{w0_fields, W0Params};
use qclab::{DiscGrid, Field, Grid, SquareGrid, C64};

fn disc(nr: usize, nt: usize) -> Arc<DiscGrid> {
    Arc::new(DiscGrid::new(nr, nt).unwrap())
}

/// Orientation-preserving circle homeomorphisms of bounded variation.
fn homeomorphisms() -> Vec<Box<dyn Fn(f64) -> f64>> {
    vec![
        Box::new(|t| t),
        Box::new(|t| t + 0.3 * t.sin()),
        Box::new(|t| t + 0.2 * (2.0 * t).sin() + 0.05 * (5.0 * t).cos()),
        Box::new(|t| t - 0.45 * t.sin()),
        Box::new(|t| t + 0.1 * (3.0 * t).sin() - 0.08 * (7.0 * t).sin()),
    ]
}

#[test]
fn arc_length_profiles_are_nondecreasing_and_below_boundary_length() {
    let g = disc(64, 256);
    let ladder: Vec<f64> = (1..=20).map(|k| 0.97 * k as f64 / 20.0).collect();
    for phi in homeomorphisms() {
        let b = CircleFn::from_fn(256, |t| C64::from_polar(1.0, phi(t))).unwrap();
        let u = poisson_extend(&b, &g).unwrap();
        let prof = arc_length_profile(&u, &ladder).unwrap();
        assert!(prof.nondecreasing, "drop {}", prof.max_relative_decrease);
        // Direct boundary length oracle: int |phi'| = 2 pi for a monotone phase.
        let tv = boundary_total_variation(&b);
        assert!((tv - 2.0 * PI).abs() < 1e-6);
        assert!(*prof.masses.last().unwrap() <= tv * (1.0 + 1e-9));
    }
}

#[test]
fn split_round_trip_with_a_source() {
    let g = disc(48, 96);
    let b = CircleFn::from_fn(96, |t| C64::from_polar(1.0, t)).unwrap();
    let src = Field::from_fn(&g, |z| C64::new(4.0 * bump(z, C64::new(0.2, -0.1), 0.5), 0.0));
    let w = solve_poisson(&b, &src).unwrap();
    let s = split_f(&w, &src).unwrap();
    assert!(s.reassembly_error(&w).unwrap() <= 1e-2);
    // The harmonic part of z + v is z itself.
    for i in 0..g.len() {
        assert!((s.a_prime.values()[i] - 1.0).norm() < 1e-6);
        assert!(s.b_prime.values()[i].norm() < 1e-6);
    }
}

#[test]
fn aprime_inequality_for_a_principal_solution() {
    let sq = Arc::new(SquareGrid::new(4.0, 256).unwrap());
    let mu = Field::from_fn(&sq, |z| C64::new(0.2 * bump(z, C64::new(0.1, 0.0), 0.6), 0.0));
    let sol = principal_solve(&BeltramiProblem::new(mu).unwrap(), DEFAULT_TOL, DEFAULT_MAX_TERMS)
        .unwrap();
    let d = disc(48, 128);
    let w = resample_to_disc(&sol.w, &d).unwrap();
    let wzb = resample_to_disc(&sol.w_zbar, &d).unwrap();
    let (lap_half, _) = gradient(&wzb).unwrap();
    let lap = lap_half.map(|v| 4.0 * v);
    let rep = aprime_inequality_check(&w, &lap, 0.2, 0.95).unwrap();
    assert!(rep.holds(1e-2), "{rep:?}");
    assert!(rep.b_relation_residual <= 1e-2, "{rep:?}");
}

#[test]
fn lipschitz_estimate_of_w0_grows_with_refinement() {
    let p = W0Params::new(0.25).unwrap();
    let mut prev = 0.0;
    for nr in [8, 16, 32, 64, 128] {
        let g = disc(nr, 16);
        let [_, wz, wzb, _] = w0_fields(&g, p).unwrap();
        let est = lipschitz_from_derivatives(&wz, &wzb);
        // Closed form at the innermost node: L^(a-1) (L - a) + a L^(a-1).
        let r0 = g.radii()[0];
        let l = 1.0 - 2.0 * r0.ln();
        assert!((est - l.powf(0.25)).abs() < 1e-9 * est);
        assert!(est > prev);
        prev = est;
    }
}
