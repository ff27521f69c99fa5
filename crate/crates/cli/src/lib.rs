//! Experiment runner for `qclab`: reads a JSON config, runs the named
//! scenarios, and writes `report.json`, `timing.json`, CSV tables and SVG
//! plots per scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;

pub use config::{load_config, parse_config, RunConfig, ScenarioConfig, SEED_ENV};
pub use output::Timing;
pub use report::{ExperimentReport, Flag};
pub use scenarios::{ScenarioInfo, SCENARIOS};

pub const DEFAULT_OUTPUT_DIR: &str = "qc-lab-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown scenario {0:?} (see `qc-lab list`)")]
    UnknownScenario(String),
    #[error("{scenario}: numerical failure: {source}")]
    Numerical {
        scenario: String,
        source: qclab::QcError,
    },
    #[error("{scenario}: flag {flag} failed")]
    FlagFailed { scenario: String, flag: String },
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for numerical or flag failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownScenario(_) => 2,
            CliError::Numerical { .. } | CliError::FlagFailed { .. } | CliError::Io(_) => 1,
        }
    }
}

/// `(name, anchor, summary)` rows of the scenario table.
pub fn list_scenarios() -> Vec<(&'static str, &'static str, &'static str)> {
    SCENARIOS.iter().map(|s| (s.name, s.anchor, s.summary)).collect()
}

pub fn format_list() -> String {
    let width = SCENARIOS.iter().map(|s| s.name.len()).max().unwrap_or(0);
    let anchor_width = SCENARIOS.iter().map(|s| s.anchor.len()).max().unwrap_or(0);
    SCENARIOS
        .iter()
        .map(|s| format!("{:width$}  {:anchor_width$}  {}\n", s.name, s.anchor, s.summary))
        .collect()
}

/// Result of one scenario run.
#[derive(Debug)]
pub struct ScenarioRun {
    pub report: ExperimentReport,
    pub timing: Timing,
}

/// Runs one scenario with its configured seed (or `QC_LAB_SEED`).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, CliError> {
    let seed = config::effective_seed(cfg.seed)?;
    let job = scenarios::prepare(cfg, seed)?;
    execute(job.as_ref())
}

fn execute(job: &dyn scenarios::Prepared) -> Result<ScenarioRun, CliError> {
    let info = job.info();
    let start = Instant::now();
    let report = job.execute().map_err(|source| match source {
        qclab::QcError::Configuration(m) => CliError::Config(format!("{}: {m}", info.name)),
        source => CliError::Numerical {
            scenario: info.name.to_string(),
            source,
        },
    })?;
    let secs = start.elapsed().as_secs_f64();
    Ok(ScenarioRun {
        report,
        timing: Timing {
            scenario: info.name.to_string(),
            wall_clock_seconds: secs,
            ceiling_seconds: info.ceiling_seconds,
            within_ceiling: secs <= info.ceiling_seconds,
        },
    })
}

/// Outcome of a whole config: per-scenario results in config order.
#[derive(Debug)]
pub struct RunOutcome {
    pub results: Vec<(String, PathBuf, Result<ScenarioRun, CliError>)>,
}

impl RunOutcome {
    /// 0 iff every scenario ran and every flag passed.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for (_, _, r) in &self.results {
            let c = match r {
                Ok(run) if run.report.passed => 0,
                Ok(_) => 1,
                Err(e) => e.exit_code(),
            };
            code = code.max(c);
        }
        code
    }

    /// One line per failure, naming the scenario and the failing flags.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, _, r) in &self.results {
            match r {
                Ok(run) => {
                    for f in run.report.failed_flags() {
                        out.push(
                            CliError::FlagFailed {
                                scenario: name.clone(),
                                flag: f.name.clone(),
                            }
                            .to_string()
                                + &format!(" (value {:e}, threshold {:e})", f.value, f.threshold),
                        );
                    }
                }
                Err(e) => out.push(e.to_string()),
            }
        }
        out
    }
}

/// Output directories `root/<scenario>`, with `-2`, `-3`, ... for repeats
/// under the same root.
fn output_dirs(targets: &[(PathBuf, &str)]) -> Vec<PathBuf> {
    let mut seen: BTreeMap<(&Path, &str), usize> = BTreeMap::new();
    targets
        .iter()
        .map(|(root, n)| {
            let k = seen.entry((root.as_path(), n)).or_insert(0);
            *k += 1;
            if *k == 1 {
                root.join(n)
            } else {
                root.join(format!("{n}-{k}"))
            }
        })
        .collect()
}

/// Validates every scenario, then runs them (concurrently with `parallel`)
/// and writes their artifacts. Configuration errors abort before any run.
pub fn run_config(run: &RunConfig, out: Option<&Path>, parallel: bool) -> Result<RunOutcome, CliError> {
    let jobs = run
        .scenarios
        .iter()
        .map(|cfg| {
            let seed = config::effective_seed(cfg.seed)?;
            scenarios::prepare(cfg, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let default_root = PathBuf::from(run.output_dir.as_deref().unwrap_or(DEFAULT_OUTPUT_DIR));
    let names: Vec<&str> = run.scenarios.iter().map(|s| s.scenario.as_str()).collect();
    let targets: Vec<(PathBuf, &str)> = run
        .scenarios
        .iter()
        .map(|s| {
            let root = match (out, &s.output_dir) {
                (Some(o), _) => o.to_path_buf(),
                (None, Some(d)) => PathBuf::from(d),
                (None, None) => default_root.clone(),
            };
            (root, s.scenario.as_str())
        })
        .collect();
    let dirs = output_dirs(&targets);

    let runs: Vec<Result<ScenarioRun, CliError>> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs.iter().map(|j| scope.spawn(move || execute(j.as_ref()))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scenario thread panicked"))
                .collect()
        })
    } else {
        jobs.iter().map(|j| execute(j.as_ref())).collect()
    };

    let mut results = Vec::with_capacity(runs.len());
    for ((name, dir), r) in names.iter().zip(dirs).zip(runs) {
        let r = match r {
            Ok(run) => output::write_artifacts(&dir, &run.report, &run.timing)
                .map(|_| run)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display()))),
            Err(e) => Err(e),
        };
        results.push((name.to_string(), dir, r));
    }
    Ok(RunOutcome { results })
}
