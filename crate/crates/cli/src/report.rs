use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// strict upper bound, or `None` for pass/fail checks
    pub tol: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol: Some(tol),
            passed: value < tol,
        }
    }

    /// Passes when `count` is zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Self {
            name: name.into(),
            value: count as f64,
            tol: None,
            passed: count == 0,
        }
    }

    pub fn flag(name: impl Into<String>, value: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tol: None,
            passed,
        }
    }
}

pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    /// file name and contents
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(&cfg.canonical()).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn write_atomic(dir: &Path, name: &str, data: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

pub fn report_json(cfg: &RunConfig, o: &Outcome) -> Value {
    json!({
        "tool": "dlplab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config_hash": config_hash(cfg),
        "config": cfg.canonical(),
        "passed": o.passed(),
        "checks": o.checks,
        "result": o.result,
        "artifacts": o
            .artifacts
            .iter()
            .map(|(name, data)| json!({ "name": name, "sha256": hex::encode(Sha256::digest(data)) }))
            .collect::<Vec<_>>(),
    })
}

pub fn write(cfg: &RunConfig, o: &Outcome, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    for (name, data) in &o.artifacts {
        write_atomic(out, name, data)?;
    }
    let mut text = serde_json::to_vec_pretty(&report_json(cfg, o)).map_err(|e| CliError::Io(e.into()))?;
    text.push(b'\n');
    write_atomic(out, "report.json", &text)
}

pub fn summary_line(cfg: &RunConfig, o: &Outcome) -> String {
    let parts: Vec<String> = o
        .checks
        .iter()
        .map(|c| match c.tol {
            Some(t) => format!("{}={:.3e} (tol {:e})", c.name, c.value, t),
            None if c.value.fract() == 0.0 => format!("{}={}", c.name, c.value),
            None => format!("{}={:.3e}", c.name, c.value),
        })
        .collect();
    format!(
        "{} {}: {}",
        if o.passed() { "PASS" } else { "FAIL" },
        cfg.command.name(),
        parts.join(", ")
    )
}
