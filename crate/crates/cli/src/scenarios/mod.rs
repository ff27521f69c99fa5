//! Scenario registry. Each scenario parses its typed parameters and
//! tolerances up front (so configuration problems surface before anything
//! runs), then executes as a pure function of that setup and the seed.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::config::{GridConfig, ScenarioConfig, Tolerances};
use crate::report::ExperimentReport;
use crate::CliError;

mod bootstrap;
mod boundary;
mod composition;
mod green;
mod neumann;
mod sharpness;
mod trend;

pub struct ScenarioInfo {
    pub name: &'static str,
    /// The theorem or lemma the scenario exercises.
    pub anchor: &'static str,
    pub summary: &'static str,
    pub ceiling_seconds: f64,
    prepare: fn(&ScenarioConfig, &'static ScenarioInfo, u64) -> Result<Box<dyn Prepared>, CliError>,
}

pub static SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "w0-sharpness",
        anchor: "Theorem 1 sharpness",
        summary: "dilatation of w0, L^2 vs L^2.5 integrability of its Laplacian, non-Lipschitz witness",
        ceiling_seconds: 10.0,
        prepare: sharpness::prepare,
    },
    ScenarioInfo {
        name: "green-solver",
        anchor: "Eq. (2.2) Green function",
        summary: "constant-source Poisson problem and the Green gradient bound at random pairs",
        ceiling_seconds: 60.0,
        prepare: green::prepare,
    },
    ScenarioInfo {
        name: "beltrami-neumann",
        anchor: "Lemma 3.1",
        summary: "radial stretch recovered by the Neumann series; geometric decay of its terms",
        ceiling_seconds: 120.0,
        prepare: neumann::prepare_stretch,
    },
    ScenarioInfo {
        name: "psi-decay",
        anchor: "Lemma 3.1 (psi(K) -> 0)",
        summary: "psi-deviation of principal solutions for a shrinking bump family",
        ceiling_seconds: 120.0,
        prepare: neumann::prepare_psi,
    },
    ScenarioInfo {
        name: "composition-identities",
        anchor: "Eq. (2.4), Eq. (3.9), Eq. (3.4)",
        summary: "Laplacians of compositions and inverses against finite differences",
        ceiling_seconds: 30.0,
        prepare: composition::prepare,
    },
    ScenarioInfo {
        name: "bootstrap",
        anchor: "Theorem 1 exponent recursion",
        summary: "q_{k+1} = 2 q_k / (4 - q_k) ledger and the excluded starting values",
        ceiling_seconds: 1.0,
        prepare: bootstrap::prepare,
    },
    ScenarioInfo {
        name: "theorem2-trend",
        anchor: "Theorem 3.5 Eq. (3.10)",
        summary: "Lipschitz constants of the dyadic near-identity family and the explicit bound",
        ceiling_seconds: 120.0,
        prepare: trend::prepare,
    },
    ScenarioInfo {
        name: "fkp-smirnov",
        anchor: "Theorem 3 / Lemma 4.5",
        summary: "half-plane extension of a Zygmund boundary: growth profile and AC detection",
        ceiling_seconds: 180.0,
        prepare: boundary::prepare_fkp,
    },
    ScenarioInfo {
        name: "ac-detector",
        anchor: "Theorem 3 / Lemma 4.1",
        summary: "arc-length monotonicity of harmonic extensions and detector calibration",
        ceiling_seconds: 30.0,
        prepare: boundary::prepare_ac,
    },
];

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// A validated scenario, ready to run.
pub trait Prepared: Send + Sync {
    fn info(&self) -> &'static ScenarioInfo;
    fn execute(&self) -> qclab::Result<ExperimentReport>;
}

pub fn prepare(cfg: &ScenarioConfig, seed: u64) -> Result<Box<dyn Prepared>, CliError> {
    let info = find(&cfg.scenario).ok_or_else(|| CliError::UnknownScenario(cfg.scenario.clone()))?;
    (info.prepare)(cfg, info, seed)
}

/// Parsed inputs shared by every scenario.
pub(crate) struct Setup<P> {
    pub info: &'static ScenarioInfo,
    pub params: P,
    pub grid: GridConfig,
    pub tol: Tolerances,
    pub seed: u64,
}

impl<P: Serialize> Setup<P> {
    /// Empty report carrying the resolved parameters.
    pub fn report(&self, grid: serde_json::Value) -> ExperimentReport {
        let parameters = json!({
            "grid": grid,
            "params": self.params,
            "tolerances": self.tol.as_map(),
        });
        ExperimentReport::new(self.info.name, self.info.anchor, self.seed, parameters)
    }
}

type Body<P> = fn(&Setup<P>) -> qclab::Result<ExperimentReport>;

struct Job<P> {
    setup: Setup<P>,
    body: Body<P>,
}

impl<P: Serialize + Send + Sync + 'static> Prepared for Job<P> {
    fn info(&self) -> &'static ScenarioInfo {
        self.setup.info
    }

    fn execute(&self) -> qclab::Result<ExperimentReport> {
        (self.body)(&self.setup)
    }
}

pub(crate) fn job<P: DeserializeOwned + Serialize + Send + Sync + 'static>(
    cfg: &ScenarioConfig,
    info: &'static ScenarioInfo,
    seed: u64,
    tolerances: &[(&str, f64)],
    validate: fn(&P, &GridConfig) -> Result<(), String>,
    body: Body<P>,
) -> Result<Box<dyn Prepared>, CliError> {
    let params: P = cfg.params()?;
    validate(&params, &cfg.grid).map_err(|m| CliError::Config(format!("{}: {m}", info.name)))?;
    let tol = Tolerances::resolve(info.name, tolerances, &cfg.tolerances)?;
    Ok(Box::new(Job {
        setup: Setup {
            info,
            params,
            grid: cfg.grid,
            tol,
            seed,
        },
        body,
    }))
}

/// Rejects grid fields a scenario does not read.
pub(crate) fn only_grid_fields(g: &GridConfig, allowed: &[&str]) -> Result<(), String> {
    let set = [
        ("n_r", g.n_r.is_some()),
        ("n_theta", g.n_theta.is_some()),
        ("n", g.n.is_some()),
        ("half_width", g.half_width.is_some()),
    ];
    for (name, present) in set {
        if present && !allowed.contains(&name) {
            return Err(format!("grid field {name} is not used by this scenario"));
        }
    }
    Ok(())
}

pub(crate) fn increasing_strictly(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

pub(crate) fn decreasing_strictly(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}
