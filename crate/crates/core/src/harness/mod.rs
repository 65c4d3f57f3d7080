//! Experiment driver: configuration, the five scenarios, and their output
//! (time-series CSV, field snapshots, and a JSON manifest per run).

pub mod config;
pub mod output;
mod scenarios;

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};

pub use config::{load_pairs, parse_pairs, ConfigPairs, RunConfig, Scenario};
pub use scenarios::{
    compare_trajectories, free_evolution_error, identity_residuals, map_substeps, observed_order,
    phase_aligned_discrepancy, run_compare, run_convergence, run_nls, run_smap, run_weights_audit,
    CompareReport, CompareRow, Discrepancy, IdentityResiduals,
};

use crate::error::{Error, Result};

/// How a criterion compares its value with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
    Above,
}

/// One checked quantity. Criteria with `gate == false` are reported only.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub gate: bool,
    pub pass: bool,
    pub note: Option<String>,
}

impl Criterion {
    fn new(name: &str, value: f64, threshold: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Above => value > threshold,
        };
        Self {
            name: name.to_string(),
            value,
            threshold,
            comparison,
            gate: true,
            pass,
            note: None,
        }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::AtMost)
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::AtLeast)
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::Above)
    }

    /// Reported without affecting the run status.
    pub fn report_only(mut self) -> Self {
        self.gate = false;
        self
    }

    /// Marks an order estimate whose errors were all zero: nothing to measure.
    pub fn degenerate(name: &str, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value: f64::NAN,
            threshold,
            comparison: Comparison::AtLeast,
            gate: true,
            pass: true,
            note: Some("degenerate: all errors are zero".into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn failed_gate(&self) -> bool {
        self.gate && !self.pass
    }
}

/// What a scenario hands back to the driver.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub criteria: Vec<Criterion>,
    pub steps: usize,
    pub dt_effective: f64,
    pub map_substeps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    Fail,
    Abort,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Pass => "pass",
            RunStatus::Fail => "fail",
            RunStatus::Abort => "abort",
        }
    }

    /// 0 = all criteria pass, 2 = a criterion failed, 3 = solver abort.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 2,
            RunStatus::Abort => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: ConfigPairs,
    pub code_version: &'static str,
    pub n: usize,
    pub r_max: f64,
    pub h: f64,
    pub outcome: Outcome,
    pub wall_clock_s: f64,
    pub status: RunStatus,
    pub diagnosis: Option<String>,
}

impl RunManifest {
    /// Flat JSON object: nested pieces are spelled as dotted keys.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.config {
            m.insert(format!("config.{k}"), json!(v));
        }
        m.insert("code_version".into(), json!(self.code_version));
        m.insert("grid.n".into(), json!(self.n));
        m.insert("grid.r_max".into(), json!(self.r_max));
        m.insert("grid.h".into(), json!(self.h));
        m.insert("solver.steps".into(), json!(self.outcome.steps));
        m.insert("solver.dt".into(), json!(self.outcome.dt_effective));
        if let Some(s) = self.outcome.map_substeps {
            m.insert("solver.map_substeps".into(), json!(s));
        }
        m.insert("wall_clock_s".into(), json!(self.wall_clock_s));
        m.insert("status".into(), json!(self.status.name()));
        m.insert(
            "diagnosis".into(),
            self.diagnosis.as_ref().map_or(Value::Null, |d| json!(d)),
        );
        for c in &self.outcome.criteria {
            let key = |s: &str| format!("criterion.{}.{s}", c.name);
            // NaN is not valid JSON
            let value = if c.value.is_finite() {
                json!(c.value)
            } else {
                Value::Null
            };
            m.insert(key("value"), value);
            m.insert(key("threshold"), json!(c.threshold));
            let cmp = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
                Comparison::Above => ">",
            };
            m.insert(key("comparison"), json!(cmp));
            m.insert(key("gate"), json!(c.gate));
            m.insert(key("pass"), json!(c.pass));
            if let Some(note) = &c.note {
                m.insert(key("note"), json!(note));
            }
        }
        Value::Object(m)
    }
}

/// Runs one scenario, writes its output and manifest under `cfg.out`, and
/// returns the manifest. Solver aborts and weight-audit violations end up in
/// the manifest; configuration and I/O problems are returned as errors.
pub fn execute(cfg: &RunConfig) -> Result<RunManifest> {
    output::create_dir(&cfg.out)?;
    let start = Instant::now();
    let result = match cfg.scenario {
        Scenario::Nls => run_nls(cfg),
        Scenario::Smap => run_smap(cfg),
        Scenario::Compare => run_compare(cfg),
        Scenario::Convergence => run_convergence(cfg),
        Scenario::WeightsAudit => run_weights_audit(cfg),
    };
    let (outcome, status, diagnosis) = match result {
        Ok(outcome) => {
            let status = if outcome.criteria.iter().any(Criterion::failed_gate) {
                RunStatus::Fail
            } else {
                RunStatus::Pass
            };
            (outcome, status, None)
        }
        Err(e) if e.is_solver_abort() => {
            (Outcome::default(), RunStatus::Abort, Some(e.to_string()))
        }
        Err(e @ Error::WeightAudit { .. }) => {
            (Outcome::default(), RunStatus::Fail, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let manifest = RunManifest {
        config: cfg.echo(),
        code_version: env!("CARGO_PKG_VERSION"),
        n: cfg.n,
        r_max: cfg.rmax,
        h: cfg.rmax / cfg.n as f64,
        outcome,
        wall_clock_s: start.elapsed().as_secs_f64(),
        status,
        diagnosis,
    };
    output::write_json(&cfg.out.join("manifest.json"), &manifest.to_json())?;
    Ok(manifest)
}

/// Reads a manifest back as a JSON value.
pub fn read_manifest(dir: &Path) -> Result<Value> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest: {e}")))
}
