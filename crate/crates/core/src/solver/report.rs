//! JSON persistence of run reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prox::ProxSetup;

use super::{RunConfig, RunReport, StepRecord};

#[derive(Serialize, Deserialize)]
struct ReportWire {
    config: RunConfig,
    setup: ProxSetup,
    lipschitz: f64,
    steps: Vec<StepRecord>,
    summary: SummaryWire,
}

#[derive(Serialize, Deserialize)]
struct SummaryWire {
    n: usize,
    n_j: usize,
    total_steps: usize,
    delta: f64,
    #[serde(default)]
    regret: Option<f64>,
    elapsed_secs: f64,
}

impl Serialize for RunReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportWire {
            config: self.config.clone(),
            setup: self.setup.clone(),
            lipschitz: self.lipschitz,
            steps: self.trace.clone(),
            summary: SummaryWire {
                n: self.n,
                n_j: self.n_j,
                total_steps: self.total_steps,
                delta: self.delta,
                regret: self.regret,
                elapsed_secs: self.elapsed_secs,
            },
        }
        .serialize(s)
    }
}

// No semantic validation here: a stored report that parses is handed to the
// verifier as-is so that inconsistencies can be named.
impl<'de> Deserialize<'de> for RunReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ReportWire::deserialize(d)?;
        Ok(RunReport {
            theta0: w.setup.theta0(),
            config: w.config,
            lipschitz: w.lipschitz,
            setup: w.setup,
            trace: w.steps,
            n: w.summary.n,
            n_j: w.summary.n_j,
            total_steps: w.summary.total_steps,
            delta: w.summary.delta,
            elapsed_secs: w.summary.elapsed_secs,
            regret: w.summary.regret,
        })
    }
}

impl RunReport {
    /// Copy of the report with per-step iterates dropped.
    pub fn without_iterates(&self) -> RunReport {
        let mut r = self.clone();
        r.trace.iter_mut().for_each(|s| s.iterate = Vec::new());
        r
    }
}

/// A file holding one or more run reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub reports: Vec<RunReport>,
}

impl TraceFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
