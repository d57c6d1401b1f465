//! Artifact encoding. Everything is built in memory and written once at the
//! end of a run, so a failed run leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// A file produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact { path: path.into(), bytes: bytes.into() }
    }
}

/// Plain decimal in the usual range, exponent notation outside it. Both are
/// the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Pretty JSON with keys in sorted order and a trailing newline.
pub fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    // round-tripping through Value sorts every object's keys
    let value = serde_json::to_value(v).expect("summary serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("summary serializes");
    s.push('\n');
    s.into_bytes()
}

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub requirement: String,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            requirement: format!("|value - {}| <= {}", num(target), num(tol)),
            pass: (value - target).abs() <= tol,
        }
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, requirement: format!("value < {}", num(bound)), pass: value < bound }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, requirement: format!("value > {}", num(bound)), pass: value > bound }
    }

    pub fn ratio_within(name: &str, value: f64, reference: f64, factor: f64) -> Self {
        let r = value / reference;
        Check {
            name: name.into(),
            value,
            requirement: format!("value / {} within factor {}", num(reference), num(factor)),
            pass: r.is_finite() && r <= factor && r >= 1.0 / factor,
        }
    }
}

/// Results of an experiment before they are written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn result(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).expect("result serializes"));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn write_artifacts(artifacts: &[Artifact]) -> Result<(), CliError> {
    for a in artifacts {
        if let Some(dir) = a.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&a.path, &a.bytes).map_err(|e| CliError::io(&a.path, e))?;
    }
    Ok(())
}

pub fn display_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}
