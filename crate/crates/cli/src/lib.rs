//! Experiment runner for collective Rydberg-blockade simulations.
//!
//! [`run`] validates an [`ExperimentConfig`], dispatches to the matching
//! experiment and writes its CSV tables, schedule dumps and a JSON summary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod quantity;
pub mod schedule_text;

use std::path::PathBuf;

use serde_json::{json, Value};

pub use config::{ExperimentConfig, ExperimentKind, Violation};
pub use error::CliError;
use output::{display_path, json_bytes, write_artifacts, Artifact, Check};

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub results: serde_json::Map<String, Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

/// Computes everything a run would write, without touching the disk.
pub fn prepare(cfg: &ExperimentConfig) -> Result<(RunReport, Vec<Artifact>), CliError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }
    let kind = cfg.kind().expect("validated");
    let mut outcome = experiments::execute(kind, cfg)?;

    let summary_path = cfg.out_dir.join("summary.json");
    let mut paths: Vec<PathBuf> = outcome.artifacts.iter().map(|a| a.path.clone()).collect();
    paths.push(summary_path.clone());
    let summary = json!({
        "experiment": kind.name(),
        "config": cfg,
        "results": outcome.results,
        "checks": outcome.checks,
        "all_checks_pass": outcome.all_pass(),
        "artifacts": paths.iter().map(|p| display_path(p)).collect::<Vec<_>>(),
    });
    outcome.artifacts.push(Artifact::new(summary_path, json_bytes(&summary)));
    let report = RunReport { kind, results: outcome.results, checks: outcome.checks, artifacts: paths };
    Ok((report, outcome.artifacts))
}

/// Validates, runs and writes all artifacts. Nothing is written unless the
/// experiment completes.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let (report, artifacts) = prepare(cfg)?;
    write_artifacts(&artifacts)?;
    Ok(report)
}
