use std::io::Write;
use std::path::{Path, PathBuf};

use qed_binding::certificate::{BindingWindow, CriticalAlpha, GSolution};
use qed_binding::photon::{Estimate, SelfEnergy, TwoPhotonTable};
use qed_binding::potential::{AssumptionReport, NormSet};
use qed_binding::schrodinger::{KlausSimon, RadialGrid, Threshold};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Threshold,
    Constants,
    Selfenergy,
    Window,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Threshold => "threshold",
            Command::Constants => "constants",
            Command::Selfenergy => "selfenergy",
            Command::Window => "window",
            Command::Verify => "verify",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Status {
    pub exit_code: i32,
    /// Steps that failed; their results are absent from the report.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSection {
    pub grid: RadialGrid,
    pub norms: NormSet,
    pub assumptions: AssumptionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSection {
    pub threshold: Threshold,
    pub klaus_simon: KlausSimon,
    /// `b(V)` on the doubled grid.
    pub b_refined: f64,
    /// `|b_refined − b|/b`
    pub b_stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsEntry {
    pub solution: GSolution,
    /// Screened Birman–Schwinger quantity at the solved `g`; below 1 when
    /// the operator bound behind `β` and `C(V)` holds.
    pub screened_bound: Estimate,
}

/// One named check with its measured value and the reference it is held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub reference: f64,
    /// Relative deviation, or deviation in standard errors for oracles.
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub version: &'static str,
    pub config: RunConfig,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstantsEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_table: Option<TwoPhotonTable>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub self_energy: Vec<SelfEnergy>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<BindingWindow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_alpha: Option<CriticalAlpha>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(command: Command, config: RunConfig) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            status: Status { exit_code: EXIT_OK, failures: Vec::new() },
            potential: None,
            threshold: None,
            constants: Vec::new(),
            photon_table: None,
            self_energy: Vec::new(),
            windows: Vec::new(),
            critical_alpha: None,
            checks: Vec::new(),
        }
    }

    /// Record a failed step; the run continues and exits with code 2.
    pub fn fail(&mut self, what: impl std::fmt::Display) {
        self.status.failures.push(what.to_string());
        self.status.exit_code = EXIT_NUMERICAL;
    }

    pub fn not_certified(&mut self) {
        if self.status.exit_code == EXIT_OK {
            self.status.exit_code = EXIT_NOT_CERTIFIED;
        }
    }
}

/// A rendered CSV curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl CsvFile {
    pub fn from_rows<T: Serialize>(name: &str, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Serialize(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
        Ok(Self { name: name.to_string(), bytes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub command: Command,
    pub threads: usize,
    pub total_seconds: f64,
    pub stages: Vec<(String, f64)>,
}

/// Everything a subcommand produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub tables: Vec<CsvFile>,
    pub timing: Timing,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
    Ok(target)
}

/// Write `<command>.json`, `<command>-timing.json` and the CSV curves.
pub fn persist(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = out.report.command.name();
    let mut written = Vec::new();
    let json = serde_json::to_vec_pretty(&out.report).map_err(|e| CliError::Serialize(e.to_string()))?;
    written.push(write_atomic(dir, &format!("{name}.json"), &json)?);
    let timing = serde_json::to_vec_pretty(&out.timing).map_err(|e| CliError::Serialize(e.to_string()))?;
    written.push(write_atomic(dir, &format!("{name}-timing.json"), &timing)?);
    for t in &out.tables {
        written.push(write_atomic(dir, &t.name, &t.bytes)?);
    }
    Ok(written)
}
