//! Built-in scenarios, their configuration and on-disk reports.
//!
//! A run of scenario `<id>` writes two files into the output directory:
//!
//! - `<id>.jsonl`: one [`CheckRecord`] per line, fields `name`, `expected`,
//!   `observed`, `tolerance`, `slack`, `pass`;
//! - `<id>.summary.json`: the [`Summary`] with the verdict, counts, anchor
//!   and an echo of the configuration.
//!
//! Wall-clock runtime is kept on the in-memory [`ScenarioReport`] only, so
//! equal configurations give byte-identical files.

mod scenarios;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::space::SpaceKind;
use crate::weak;

pub use scenarios::ScenarioInfo;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario `{0}` (see `cat0lab list`)")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    /// eps for Δ-tests, hull containment and audit gaps
    pub tol: f64,
    pub seed: u64,
    /// random probes added to the named ones
    pub probes: usize,
    pub tail_start: usize,
    pub tail_len: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            tol: weak::DEFAULT_EPS,
            seed: 0,
            probes: weak::DEFAULT_RANDOM_PROBES,
            tail_start: weak::DEFAULT_TAIL_START,
            tail_len: weak::DEFAULT_TAIL_LEN,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(HarnessError::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.tail_len == 0 {
            return Err(HarnessError::Config("tail length must be positive".into()));
        }
        if self.tail_start == 0 {
            return Err(HarnessError::Config("tail start must be positive".into()));
        }
        Ok(())
    }

    /// Seed for this scenario: the configured seed mixed with the id.
    pub fn scenario_seed(&self, id: &str) -> u64 {
        // FNV-1a, stable across platforms and releases
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in id.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^ self.seed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: f64,
    /// nonnegative iff the check passes, where a margin makes sense
    pub slack: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// `error ≤ tolerance`.
    pub fn within(name: impl Into<String>, expected: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected: expected.into(),
            observed: format!("{error:e}"),
            tolerance,
            slack: tolerance - error,
            pass: error <= tolerance,
        }
    }

    /// `value ≥ floor`.
    pub fn at_least(name: impl Into<String>, expected: impl Into<String>, value: f64, floor: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("{} ≥ {floor:e}", expected.into()),
            observed: format!("{value:e}"),
            tolerance: floor.abs(),
            slack: value - floor,
            pass: value >= floor,
        }
    }

    /// A yes/no outcome.
    pub fn flag(name: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            tolerance: 0.0,
            slack: if pass { 0.0 } else { -1.0 },
            pass,
        }
    }

    /// An operation that should have produced a value but failed.
    pub fn error(name: impl Into<String>, expected: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::flag(name, expected, format!("error: {err}"), false)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub description: String,
    pub anchor: String,
    pub space: SpaceKind,
    pub verdict: Verdict,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
    pub runtime: Duration,
}

impl ScenarioReport {
    pub fn verdict(&self) -> Verdict {
        self.summary.verdict
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| HarnessError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let id = &self.summary.scenario;

        let lines = dir.join(format!("{id}.jsonl"));
        let mut buf = Vec::new();
        for c in &self.checks {
            serde_json::to_writer(&mut buf, c).expect("check records serialize");
            buf.push(b'\n');
        }
        fs::write(&lines, buf).map_err(io_err(&lines))?;

        let summary = dir.join(format!("{id}.summary.json"));
        let mut text = serde_json::to_vec_pretty(&self.summary).expect("summary serializes");
        text.push(b'\n');
        fs::File::create(&summary)
            .and_then(|mut f| f.write_all(&text))
            .map_err(io_err(&summary))?;
        Ok(())
    }
}

/// Every scenario in listing order.
pub fn list_scenarios() -> &'static [ScenarioInfo] {
    scenarios::CATALOG
}

/// Resolves an id or alias.
pub fn find_scenario(id: &str) -> Option<&'static ScenarioInfo> {
    scenarios::CATALOG
        .iter()
        .find(|s| s.id == id || s.aliases.contains(&id))
}

/// Runs one scenario and, if `config.out` is set, writes its report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, HarnessError> {
    config.validate()?;
    let info = find_scenario(&config.scenario).ok_or_else(|| HarnessError::UnknownScenario(config.scenario.clone()))?;
    let mut config = config.clone();
    config.scenario = info.id.to_string();

    let started = Instant::now();
    let checks = (info.run)(&config);
    let runtime = started.elapsed();

    let passed = checks.iter().filter(|c| c.pass).count();
    let summary = Summary {
        scenario: info.id.to_string(),
        description: info.description.to_string(),
        anchor: info.anchor.to_string(),
        space: info.space,
        verdict: if passed == checks.len() { Verdict::Pass } else { Verdict::Fail },
        checks: checks.len(),
        passed,
        failed: checks.len() - passed,
        config: config.clone(),
    };
    let report = ScenarioReport {
        summary,
        checks,
        runtime,
    };
    if let Some(dir) = &config.out {
        report.write_to(dir)?;
    }
    Ok(report)
}

/// Runs several scenarios on a pool of `jobs` threads; reports come back in
/// input order.
pub fn run_many(configs: &[ScenarioConfig], jobs: usize) -> Result<Vec<ScenarioReport>, HarnessError> {
    for c in configs {
        c.validate()?;
        if find_scenario(&c.scenario).is_none() {
            return Err(HarnessError::UnknownScenario(c.scenario.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    pool.install(|| configs.par_iter().map(run_scenario).collect())
}
