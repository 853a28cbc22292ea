//! Experiment commands shared by the `bloch-lab` binary and the examples.
//!
//! Every command returns a [`CommandOutput`]: a JSON envelope with
//! `schema_version`, `command`, `seed`, `timestamp`, `plan`, `failures` and
//! `results`, plus an optional CSV table. The process exit code is 0 iff
//! `failures` is 0.

mod commands;
mod corpus;
mod lemmas;

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::holo::DEFAULT_DEGREE_CAP;
use crate::sampling::SamplingPlan;

pub use commands::{cmd_classify, cmd_norm, cmd_oracle, cmd_sweep, cmd_verify_lemmas, oracle_corpus};
pub use corpus::{builtin_maps, random_polynomials, test_functions, Corpus};
pub use lemmas::{run_suite, LemmaRow, LemmaSettings, POINTS_PER_CHECK};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Specification files; commands with a built-in corpus use it when empty.
    pub specs: Vec<PathBuf>,
    /// Bloch exponents; empty selects the command default.
    pub p: Vec<f64>,
    /// Target exponents; empty selects the command default.
    pub q: Vec<f64>,
    pub plan: SamplingPlan,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    /// Rule ids for `classify`; empty runs all.
    pub theorems: Vec<String>,
    pub degree_cap: usize,
    /// Attach oracle cross-checks to `norm` and `classify`.
    pub oracle: bool,
    /// Dimension of the built-in corpus.
    pub dimension: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            specs: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            plan: SamplingPlan::default(),
            out_json: None,
            out_csv: None,
            theorems: Vec::new(),
            degree_cap: DEFAULT_DEGREE_CAP,
            oracle: false,
            dimension: 2,
        }
    }
}

impl ExperimentConfig {
    pub(crate) fn ps(&self, default: &[f64]) -> Vec<f64> {
        if self.p.is_empty() {
            default.to_vec()
        } else {
            self.p.clone()
        }
    }

    pub(crate) fn qs(&self, default: &[f64]) -> Vec<f64> {
        if self.q.is_empty() {
            default.to_vec()
        } else {
            self.q.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub command: String,
    pub json: Value,
    pub csv: Option<String>,
    /// Suite failures or oracle breaches.
    pub failures: usize,
}

impl CommandOutput {
    pub(crate) fn new(command: &str, config: &ExperimentConfig, results: impl Serialize, failures: usize) -> Result<Self> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let json = json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "seed": config.plan.seed,
            "timestamp": timestamp,
            "plan": config.plan,
            "failures": failures,
            "results": serde_json::to_value(results)?,
        });
        Ok(Self { command: command.to_string(), json, csv: None, failures })
    }

    pub(crate) fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            1
        }
    }

    /// The envelope without its `timestamp`, for reproducibility checks.
    pub fn json_without_timestamp(&self) -> Value {
        let mut v = self.json.clone();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timestamp");
        }
        v
    }

    /// Writes the JSON and CSV outputs requested by `config`.
    pub fn write(&self, config: &ExperimentConfig) -> Result<()> {
        if let Some(path) = &config.out_json {
            std::fs::write(path, serde_json::to_string_pretty(&self.json)? + "\n")?;
        }
        if let (Some(path), Some(csv)) = (&config.out_csv, &self.csv) {
            std::fs::write(path, csv)?;
        }
        Ok(())
    }
}

pub(crate) fn csv_string<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| crate::error::BlochError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
