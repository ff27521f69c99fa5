use serde::{Deserialize, Serialize};
use serde_json::json;

use qclab::maps::{
    w0_dilatation_check, w0_laplacian_integrability, w0_non_lipschitz_witness, W0Params,
};
use qclab::DiscGrid;

use super::{increasing_strictly, job, only_grid_fields, Prepared, ScenarioInfo, Setup};
use crate::config::{GridConfig, ScenarioConfig};
use crate::report::{Cell, Comparison, ExperimentReport, Flag, Plot, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Exponents checked against the dilatation bound.
    pub a_values: Vec<f64>,
    /// Exponent used for the integrability and witness checks.
    pub a: f64,
    pub p_convergent: f64,
    pub p_divergent: f64,
    /// Inner cutoffs `10^(-4j)`, `j = 1..=levels`.
    pub levels: usize,
    /// Witness radii `10^-k`, `k = 1..=witness_decades`.
    pub witness_decades: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            a_values: vec![0.1, 0.25, 0.4],
            a: 0.25,
            p_convergent: 2.0,
            p_divergent: 2.5,
            levels: 5,
            witness_decades: 8,
        }
    }
}

const TOLERANCES: &[(&str, f64)] = &[
    ("dilatation_slack", 1e-9),
    ("cauchy_relative_change", 0.02),
    ("divergence_growth", 5.0),
    ("witness_ratio", 2.4),
];

fn validate(p: &Params, g: &GridConfig) -> Result<(), String> {
    only_grid_fields(g, &["n_r", "n_theta"])?;
    if p.a_values.is_empty() {
        return Err("a_values is empty".into());
    }
    if p.witness_decades < 2 {
        return Err("witness_decades must be at least 2".into());
    }
    Ok(())
}

pub fn prepare(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
) -> Result<Box<dyn Prepared>, CliError> {
    job(cfg, info, seed, TOLERANCES, validate, run)
}

fn run(s: &Setup<Params>) -> qclab::Result<ExperimentReport> {
    let p = &s.params;
    let n_r = s.grid.n_r.unwrap_or(256);
    let n_theta = s.grid.n_theta.unwrap_or(512);
    let mut r = s.report(json!({ "n_r": n_r, "n_theta": n_theta }));
    let grid = DiscGrid::new(n_r, n_theta)?;

    let mut dil = Table::new("dilatation", &["a", "sup_mu", "bound"]);
    let mut worst_excess = f64::NEG_INFINITY;
    for &a in &p.a_values {
        let c = w0_dilatation_check(W0Params::new(a)?, &grid)?;
        worst_excess = worst_excess.max(c.sup_mu - c.bound);
        dil.push(vec![a.into(), c.sup_mu.into(), c.bound.into()]);
    }
    r.table(dil);
    r.flag(Flag::compare(
        "dilatation_bound",
        "maps: sup |mu_w0| <= a / (1 - a) at every node",
        worst_excess,
        Comparison::AtMost,
        s.tol.get("dilatation_slack"),
    ));

    let w0 = W0Params::new(p.a)?;
    let rep = w0_laplacian_integrability(w0, &[p.p_convergent, p.p_divergent], p.levels)?;
    let (conv, div) = (&rep.series[0], &rep.series[1]);
    // Cauchy: increments shrink and the last one is small relative to the norm.
    let increments: Vec<f64> = conv.norms.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrinking = increments.windows(2).all(|d| d[1] < d[0]);
    r.flag(Flag::compare(
        &format!("L{}_convergent", p.p_convergent),
        "maps: ||Delta w0||_p Cauchy under inner-cutoff refinement (p = 2)",
        if shrinking { conv.last_relative_change } else { f64::INFINITY },
        Comparison::Below,
        s.tol.get("cauchy_relative_change"),
    ));
    r.flag(Flag::compare(
        &format!("L{}_divergent", p.p_divergent),
        "maps: ||Delta w0||_p grows without bound for p > 2",
        div.growth,
        Comparison::AtLeast,
        s.tol.get("divergence_growth"),
    ));
    r.series("cutoffs", conv.cutoffs.clone());
    r.series(&format!("norms_p{}", p.p_convergent), conv.norms.clone());
    r.series(&format!("norms_p{}", p.p_divergent), div.norms.clone());
    r.scalar("last_relative_change", conv.last_relative_change);
    r.scalar("divergent_growth", div.growth);
    r.table(Table::from_columns(
        "integrability",
        &[
            ("cutoff", &conv.cutoffs),
            (&format!("norm_p{}", p.p_convergent), &conv.norms),
            (&format!("norm_p{}", p.p_divergent), &div.norms),
        ],
    ));
    r.plot(Plot {
        name: "integrability".into(),
        title: format!("L^p norms of the Laplacian of w0, a = {}", p.a),
        x_label: "inner cutoff".into(),
        y_label: "norm".into(),
        log_x: true,
        log_y: true,
        lines: rep
            .series
            .iter()
            .map(|ser| {
                (
                    format!("p = {}", ser.p),
                    ser.cutoffs.iter().copied().zip(ser.norms.iter().copied()).collect(),
                )
            })
            .collect(),
    });

    let radii: Vec<f64> = (1..=p.witness_decades).map(|k| 10f64.powi(-(k as i32))).collect();
    let wit = w0_non_lipschitz_witness(w0, &radii)?;
    let last = *wit.ratios.last().expect("nonempty radii");
    r.flag(Flag::compare(
        "non_lipschitz",
        "maps: |w0(r)| / r increases without bound as r -> 0",
        if increasing_strictly(&wit.ratios) { last } else { 0.0 },
        Comparison::Above,
        s.tol.get("witness_ratio"),
    ));
    let r_min = *radii.last().expect("nonempty radii");
    r.scalar("witness_ratio", last);
    r.scalar("witness_closed_form", (1.0 - 2.0 * r_min.ln()).powf(p.a));
    let mut wt = Table::new("witness", &["r", "ratio"]);
    for (x, y) in radii.iter().zip(&wit.ratios) {
        wt.push(vec![Cell::Num(*x), Cell::Num(*y)]);
    }
    r.table(wt);
    r.plot(Plot {
        name: "witness".into(),
        title: format!("Difference quotients |w0(r)| / r, a = {}", p.a),
        x_label: "r".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: false,
        lines: vec![("ratio".into(), radii.iter().copied().zip(wit.ratios.iter().copied()).collect())],
    });
    Ok(r)
}
