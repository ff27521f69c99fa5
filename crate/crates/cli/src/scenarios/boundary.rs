use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::diagnostics::{
    absolute_continuity_detector, arc_length_profile, boundary_total_variation, AcReport, AcVerdict,
    BoundaryTrace, MONOTONE_SLACK,
};
use qclab::greenpoisson::{poisson_extend, CircleFn};
use qclab::halfplane::{
    fkp_extend, fkp_scale_profile, riesz_product_zygmund, zygmund_convolution_estimate_check, LineFn,
    RieszProductParams,
};
use qclab::{DiscGrid, C64};

use super::{job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Cell, Comparison, ExperimentReport, Flag, Plot, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RieszConfig {
    pub depth: u32,
    pub a: f64,
    pub base: u32,
    /// `null` selects the classical (uncapped) product.
    pub cap: Option<f64>,
}

impl Default for RieszConfig {
    fn default() -> Self {
        let p = RieszProductParams::calibrated();
        Self {
            depth: p.depth,
            a: p.a,
            base: p.base,
            cap: p.cap,
        }
    }
}

impl RieszConfig {
    fn params(&self) -> qclab::Result<RieszProductParams> {
        match self.cap {
            Some(c) => RieszProductParams::capped(self.depth, self.a, self.base, c),
            None => RieszProductParams::new(self.depth, self.a, self.base),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FkpParams {
    pub riesz: RieszConfig,
    /// Scales `t = 2^-e` for `e` in this inclusive range.
    pub scale_exponents: [i32; 2],
    /// Detector cell widths `2^-m` (relative to the interval length).
    pub resolutions: Vec<u32>,
    /// Smooth traces have `2^smooth_log2_samples` intervals.
    pub smooth_log2_samples: u32,
}

impl Default for FkpParams {
    fn default() -> Self {
        Self {
            riesz: RieszConfig::default(),
            scale_exponents: [3, 14],
            resolutions: (10..=16).collect(),
            smooth_log2_samples: 20,
        }
    }
}

const FKP_TOLERANCES: &[(&str, f64)] = &[
    ("identity_error", 1e-8),
    ("laplacian_ratio", 10.0),
    ("gradient_ratio", 10.0),
];

fn validate_fkp(p: &FkpParams, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &[])?;
    let [lo, hi] = p.scale_exponents;
    if !(0 <= lo && lo < hi && hi <= 20) {
        return Err("scale_exponents must satisfy 0 <= lo < hi <= 20".into());
    }
    if p.resolutions.len() < 3 {
        return Err("need at least three resolutions".into());
    }
    if !(8..=22).contains(&p.smooth_log2_samples) {
        return Err("smooth_log2_samples must lie in 8..=22".into());
    }
    Ok(())
}

pub fn prepare_fkp(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, FKP_TOLERANCES, validate_fkp, run_fkp)
}

type Trace = (&'static str, fn(f64) -> f64);

/// Boundary diffeomorphisms `g = x + g0` with smooth increasing `g0`.
const SMOOTH_TRACES: [Trace; 2] = [
    ("sine", |x| 0.5 * (x + 1.0) + 0.1 * (PI * x).sin()),
    ("wave3", |x| 0.5 * (x + 1.0) + 0.04 * (3.0 * PI * x).sin()),
];

fn detector_rows(t: &mut Table, trace: &str, rep: &AcReport) {
    for (m, f) in rep.resolutions.iter().zip(&rep.fractions) {
        t.push(vec![trace.into(), Cell::Num(*m as f64), Cell::Num(*f)]);
    }
}

fn run_fkp(s: &Setup<FkpParams>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let mut r = s.report(json!({}));
    r.label("sign_convention", qclab::halfplane::SIGN_CONVENTION);

    let mut id_err: f64 = 0.0;
    for x in [-3.0, -0.5, 0.0, 0.7, 2.5] {
        for t in [1e-4, 0.01, 0.5, 4.0] {
            let u = fkp_extend(&LineFn::identity(), x, t)?;
            id_err = id_err.max((u - C64::new(x, t)).norm());
        }
    }
    r.scalar("identity_error", id_err);
    r.flag(Flag::compare(
        "identity_extension",
        "halfplane: the identity boundary extends to the identity",
        id_err,
        Comparison::AtMost,
        s.tol.get("identity_error"),
    ));

    let g = riesz_product_zygmund(p.riesz.params()?)?;
    let ts: Vec<f64> = (p.scale_exponents[0]..=p.scale_exponents[1]).map(|e| 0.5f64.powi(e)).collect();
    let prof = fkp_scale_profile(&g, &ts)?;
    r.scalar("laplacian_ratio", prof.laplacian_ratio);
    r.scalar("gradient_ratio", prof.gradient_ratio);
    r.scalar("dilatation_sup", prof.dilatation_sup);
    r.flag(Flag::compare(
        "laplacian_profile_bounded",
        "halfplane: t sup |Delta u| is bounded above and below across scales",
        prof.laplacian_ratio,
        Comparison::AtMost,
        s.tol.get("laplacian_ratio"),
    ));
    r.flag(Flag::compare(
        "gradient_profile_bounded",
        "halfplane: sup |grad u| / log(e + 1/t) is bounded across scales",
        prof.gradient_ratio,
        Comparison::AtMost,
        s.tol.get("gradient_ratio"),
    ));
    r.flag(Flag::compare(
        "quasiconformal_extension",
        "halfplane: sup |u_zbar / u_z| < 1",
        prof.dilatation_sup,
        Comparison::Below,
        1.0,
    ));
    let zc = zygmund_convolution_estimate_check(&g, &ts)?;
    r.series("zygmund_convolution_profile", zc.profile.clone());
    r.scalar("zygmund_convolution_ratio", zc.ratio);

    let col = |f: fn(&qclab::halfplane::FkpScale) -> f64| prof.scales.iter().map(f).collect::<Vec<f64>>();
    let (lap, grad, dil) = (col(|x| x.scaled_laplacian), col(|x| x.scaled_gradient), col(|x| x.dilatation_sup));
    r.series("t", ts.clone());
    r.series("scaled_laplacian", lap.clone());
    r.series("scaled_gradient", grad.clone());
    r.table(Table::from_columns(
        "profile",
        &[
            ("t", &ts),
            ("laplacian_sup", &col(|x| x.laplacian_sup)),
            ("scaled_laplacian", &lap),
            ("gradient_sup", &col(|x| x.gradient_sup)),
            ("scaled_gradient", &grad),
            ("dilatation_sup", &dil),
            ("zygmund_convolution", &zc.profile),
        ],
    ));
    r.plot(Plot {
        name: "profile".into(),
        title: "Growth profile of the extension of the Riesz-product boundary".into(),
        x_label: "t".into(),
        y_label: "scaled quantity".into(),
        log_x: true,
        log_y: false,
        lines: vec![
            ("t sup|Delta u|".into(), ts.iter().copied().zip(lap.iter().copied()).collect()),
            ("sup|grad u| / log(e+1/t)".into(), ts.iter().copied().zip(grad.iter().copied()).collect()),
        ],
    });

    let mut det = Table::new("detector", &["trace", "resolution", "fraction"]);
    let riesz = absolute_continuity_detector(&BoundaryTrace::Line(g), &p.resolutions)?;
    detector_rows(&mut det, "riesz", &riesz);
    r.series("riesz_fractions", riesz.fractions.clone());
    r.label("riesz_verdict", riesz.verdict.as_str());
    r.flag(Flag::holds(
        "riesz_singular_consistent",
        "diagnostics: the Riesz-product trace is flagged singular-consistent",
        riesz.verdict == AcVerdict::SingularConsistent,
    ));
    let mut all_ac = true;
    for (name, f) in SMOOTH_TRACES {
        let h = LineFn::from_g0(p.smooth_log2_samples, f)?;
        let rep = absolute_continuity_detector(&BoundaryTrace::Line(h), &p.resolutions)?;
        detector_rows(&mut det, name, &rep);
        r.series(&format!("{name}_fractions"), rep.fractions.clone());
        r.label(&format!("{name}_verdict"), rep.verdict.as_str());
        all_ac &= rep.verdict == AcVerdict::AcConsistent;
    }
    r.flag(Flag::holds(
        "smooth_ac_consistent",
        "diagnostics: smooth diffeomorphism traces are flagged AC-consistent",
        all_ac,
    ));
    r.table(det);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcParams {
    /// Radii `r_max * k / ladder`, `k = 1..=ladder`.
    pub ladder: usize,
    pub r_max: f64,
    /// Circle traces for the detector use `2^circle_log2_samples` samples.
    pub circle_log2_samples: u32,
    pub circle_resolutions: Vec<u32>,
    /// Binomial cascade: weight of the left half at every split.
    pub cascade_weight: f64,
    pub cascade_depth: u32,
    pub cascade_resolutions: Vec<u32>,
}

impl Default for AcParams {
    fn default() -> Self {
        Self {
            ladder: 20,
            r_max: 0.97,
            circle_log2_samples: 14,
            circle_resolutions: (6..=12).collect(),
            cascade_weight: 0.2,
            cascade_depth: 16,
            cascade_resolutions: (8..=14).collect(),
        }
    }
}

const AC_TOLERANCES: &[(&str, f64)] = &[("monotone_slack", MONOTONE_SLACK), ("mass_excess", 1e-9)];

fn validate_ac(p: &AcParams, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n_r", "n_theta"])?;
    if p.ladder < 2 || !(p.r_max > 0.0 && p.r_max < 1.0) {
        return Err("need ladder >= 2 and r_max in (0, 1)".into());
    }
    if !(p.cascade_weight > 0.0 && p.cascade_weight < 1.0) || !(1..=22).contains(&p.cascade_depth) {
        return Err("cascade_weight must lie in (0, 1) and cascade_depth in 1..=22".into());
    }
    if !(4..=20).contains(&p.circle_log2_samples) {
        return Err("circle_log2_samples must lie in 4..=20".into());
    }
    Ok(())
}

pub fn prepare_ac(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, AC_TOLERANCES, validate_ac, run_ac)
}

/// Orientation-preserving circle homeomorphisms `theta -> phi(theta)`.
const HOMEOMORPHISMS: [Trace; 5] = [
    ("identity", |t| t),
    ("sine", |t| t + 0.3 * t.sin()),
    ("two_mode", |t| t + 0.2 * (2.0 * t).sin() + 0.05 * (5.0 * t).cos()),
    ("steep", |t| t - 0.45 * t.sin()),
    ("high_mode", |t| t + 0.1 * (3.0 * t).sin() - 0.08 * (7.0 * t).sin()),
];

/// Distribution function of the binomial cascade on `[0, 1]`: every dyadic
/// interval passes fraction `w` of its mass to its left half.
pub fn binomial_cascade(w: f64, depth: u32) -> Vec<f64> {
    let mut masses = vec![1.0];
    for _ in 0..depth {
        masses = masses.iter().flat_map(|m| [w * m, (1.0 - w) * m]).collect();
    }
    let mut cdf = Vec::with_capacity(masses.len() + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for m in masses {
        acc += m;
        cdf.push(acc);
    }
    cdf
}

fn run_ac(s: &Setup<AcParams>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let n_r = s.grid.n_r.unwrap_or(64);
    let n_theta = s.grid.n_theta.unwrap_or(256);
    let mut r = s.report(json!({ "n_r": n_r, "n_theta": n_theta }));
    let g = Arc::new(DiscGrid::new(n_r, n_theta)?);
    let ladder: Vec<f64> = (1..=p.ladder).map(|k| p.r_max * k as f64 / p.ladder as f64).collect();

    let mut cols: Vec<Vec<f64>> = Vec::new();
    let (mut worst_drop, mut worst_excess, mut worst_tv, mut worst_residual) = (0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut det = Table::new("detector", &["trace", "resolution", "fraction"]);
    let mut circle_ac = true;
    for (name, phi) in HOMEOMORPHISMS {
        let b = CircleFn::from_fn(n_theta, |t| C64::from_polar(1.0, phi(t)))?;
        let u = poisson_extend(&b, &g)?;
        let prof = arc_length_profile(&u, &ladder)?;
        let tv = boundary_total_variation(&b);
        worst_drop = worst_drop.max(prof.max_relative_decrease);
        worst_excess = worst_excess.max(prof.masses.last().expect("nonempty ladder") / tv - 1.0);
        worst_tv = worst_tv.max((tv - 2.0 * PI).abs());
        worst_residual = worst_residual.max(prof.harmonic_residual);
        r.series(&format!("arc_length_{name}"), prof.masses.clone());
        cols.push(prof.masses);

        let fine = CircleFn::from_fn(1 << p.circle_log2_samples, |t| C64::from_polar(1.0, phi(t)))?;
        let rep = absolute_continuity_detector(&BoundaryTrace::Circle(fine), &p.circle_resolutions)?;
        detector_rows(&mut det, name, &rep);
        r.label(&format!("{name}_verdict"), rep.verdict.as_str());
        circle_ac &= rep.verdict == AcVerdict::AcConsistent;
    }
    r.scalar("max_relative_decrease", worst_drop);
    r.scalar("max_mass_excess", worst_excess);
    r.scalar("boundary_length_error", worst_tv);
    r.scalar("harmonic_residual", worst_residual);
    r.flag(Flag::compare(
        "arc_length_monotone",
        "diagnostics: r -> |Gamma_r| is nondecreasing",
        worst_drop,
        Comparison::AtMost,
        s.tol.get("monotone_slack"),
    ));
    r.flag(Flag::compare(
        "arc_length_below_boundary",
        "diagnostics: |Gamma_r| <= total variation of the boundary map",
        worst_excess,
        Comparison::AtMost,
        s.tol.get("mass_excess"),
    ));
    r.flag(Flag::holds(
        "homeomorphisms_ac_consistent",
        "diagnostics: smooth circle homeomorphisms are flagged AC-consistent",
        circle_ac,
    ));

    let cascade = binomial_cascade(p.cascade_weight, p.cascade_depth);
    let rep = absolute_continuity_detector(&BoundaryTrace::Samples(cascade), &p.cascade_resolutions)?;
    detector_rows(&mut det, "cascade", &rep);
    r.series("cascade_fractions", rep.fractions.clone());
    r.label("cascade_verdict", rep.verdict.as_str());
    r.flag(Flag::holds(
        "cascade_singular_consistent",
        "diagnostics: a binomial-cascade distribution is flagged singular-consistent",
        rep.verdict == AcVerdict::SingularConsistent,
    ));
    r.table(det);

    let mut names = vec!["r"];
    names.extend(HOMEOMORPHISMS.iter().map(|h| h.0));
    let mut t = Table::new("arc_length", &names);
    for (i, rr) in ladder.iter().enumerate() {
        let mut row = vec![Cell::Num(*rr)];
        row.extend(cols.iter().map(|c| Cell::Num(c[i])));
        t.push(row);
    }
    r.table(t);
    r.plot(Plot {
        name: "arc_length".into(),
        title: "Length of the image of |z| = r under the harmonic extension".into(),
        x_label: "r".into(),
        y_label: "|Gamma_r|".into(),
        log_x: false,
        log_y: false,
        lines: HOMEOMORPHISMS
            .iter()
            .zip(&cols)
            .map(|((name, _), c)| (name.to_string(), ladder.iter().copied().zip(c.iter().copied()).collect()))
            .collect(),
    });
    Ok(r)
}
