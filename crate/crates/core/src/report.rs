//! Versioned JSON run reports and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Clause, Ec3Instance};
use crate::protocol::{ProtocolParams, RoundRecord, RunResult, RunStatus};

pub const REPORT_VERSION: u32 = 1;

/// Written into every report: some recorded quantities are read straight
/// from amplitudes, which a physical device could not do.
pub const SIMULATOR_NOTE: &str = "decay_probability, scan_max_decay, c1_sq, c2_sq and the decompositions are \
read directly from simulated amplitudes and are not observable on hardware";

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub n: usize,
    pub m: usize,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub assignment: Assignment,
    pub weight: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub round_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub report_version: u32,
    pub instance: InstanceInfo,
    pub params: ProtocolParams,
    pub rounds: Vec<RoundRecord>,
    pub status: RunStatus,
    pub solutions: Vec<SolutionEntry>,
    pub timing: Timing,
    pub note: String,
}

impl RunReport {
    pub fn new(instance: &Ec3Instance, run: &RunResult) -> Self {
        let mut solutions: Vec<SolutionEntry> = run
            .solutions
            .iter()
            .map(|w| SolutionEntry { assignment: w.assignment.clone(), weight: w.weight, verified: true })
            .collect();
        solutions.extend(
            run.rejected
                .iter()
                .map(|w| SolutionEntry { assignment: w.assignment.clone(), weight: w.weight, verified: false }),
        );
        RunReport {
            report_version: REPORT_VERSION,
            instance: InstanceInfo { n: instance.n(), m: instance.m(), clauses: instance.clauses().to_vec() },
            params: run.params.clone(),
            rounds: run.records.clone(),
            status: run.status,
            solutions,
            timing: Timing { total_seconds: run.total_seconds, round_seconds: run.round_seconds.clone() },
            note: SIMULATOR_NOTE.to_string(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(text)?;
        if r.report_version != REPORT_VERSION {
            return Err(Error::param(format!("unsupported report_version {}", r.report_version)));
        }
        Ok(r)
    }

    /// Rebuilds the instance the report was produced from.
    pub fn instance(&self) -> Result<Ec3Instance> {
        Ec3Instance::new(self.instance.n, self.instance.clauses.clone())
    }

    /// The same report with wall-clock fields zeroed.
    pub fn without_timing(&self) -> Self {
        RunReport {
            timing: Timing { total_seconds: 0.0, round_seconds: vec![0.0; self.timing.round_seconds.len()] },
            ..self.clone()
        }
    }
}
