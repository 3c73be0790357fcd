//! Scenario orchestration: configuration, seeded runs, CSV reports and
//! verdicts.

pub mod config;
pub mod scenarios;
pub mod specs;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub use config::Config;
pub use scenarios::{ScenarioKind, ScenarioParams};

use crate::error::{Error, Result};
use crate::table::Table;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// A named pass/fail outcome. Informational verdicts are reported but do
/// not affect the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub informational: bool,
    pub detail: String,
}

impl Verdict {
    pub fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            informational: false,
            detail: detail.into(),
        }
    }

    pub fn info(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            informational: true,
            ..Self::check(name, passed, detail)
        }
    }
}

/// Tables and verdicts produced by one scenario body.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Parsed, validated scenario configuration.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub params: ScenarioParams,
    /// Effective configuration in file format, defaults expanded.
    pub echo: String,
}

impl ScenarioConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let kind: ScenarioKind = cfg.required_string("scenario", "kind")?.parse()?;
        let name = cfg.string("scenario", "name", kind.tag())?;
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::Config(format!("scenario name {name:?} is not a plain file name")));
        }
        let seed = cfg.u64("scenario", "seed", 1)?;
        let params = ScenarioParams::from_config(kind, cfg)?;
        cfg.reject_unused()?;
        Ok(Self {
            name,
            seed,
            params,
            echo: cfg.echo(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_config(&Config::parse(text)?)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.params.kind()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub outcome: Outcome,
    pub config_echo: String,
    pub runtime: Duration,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.outcome
            .verdicts
            .iter()
            .all(|v| v.passed || v.informational)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    /// Human-readable summary: verdicts, runtime and the config echo.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {} ({}) seed {}", self.name, self.kind.tag(), self.seed);
        for v in &self.outcome.verdicts {
            let tag = match (v.passed, v.informational) {
                (true, false) => "PASS",
                (false, false) => "FAIL",
                (true, true) => "INFO ok",
                (false, true) => "INFO no",
            };
            let _ = writeln!(s, "  {tag:<7} {}: {}", v.name, v.detail);
        }
        let _ = writeln!(
            s,
            "  result: {} in {:.3} s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.runtime.as_secs_f64()
        );
        s
    }

    /// Write `<dir>/<name>/<table>.csv` for every table plus `report.txt`
    /// (summary and config echo). Returns the CSV paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let base = dir.join(&self.name);
        std::fs::create_dir_all(&base)?;
        let mut paths = Vec::new();
        for t in &self.outcome.tables {
            let path = base.join(format!("{}.csv", t.name));
            let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            t.write_csv(file)?;
            paths.push(path);
        }
        let text = format!("{}\n# effective configuration\n{}", self.summary(), self.config_echo);
        std::fs::write(base.join("report.txt"), text)?;
        Ok(paths)
    }
}

/// Run a scenario on the current rayon pool.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let start = Instant::now();
    let outcome = config.params.run(config.seed)?;
    Ok(ScenarioReport {
        name: config.name.clone(),
        kind: config.kind(),
        seed: config.seed,
        outcome,
        config_echo: config.echo.clone(),
        runtime: start.elapsed(),
    })
}

/// Run a scenario on a dedicated pool of `threads` workers.
pub fn run_scenario_with_threads(config: &ScenarioConfig, threads: usize) -> Result<ScenarioReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_scenario(config))
}

/// Exit code for an error: configuration-type problems map to 2.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Format(_) => EXIT_FAIL,
        _ => EXIT_CONFIG,
    }
}
