//! Experiment dispatch, output files and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, OutputMode};
use crate::experiments::{self, ExperimentError, ExperimentKind, ExperimentOutput, RunOptions};
use crate::output::{self, OutputError};

/// `git describe` of the build, or the crate version outside a checkout.
pub fn version_string() -> String {
    match option_env!("CITYMST_GIT_DESCRIBE") {
        Some(d) => format!("{}-{}", env!("CARGO_PKG_VERSION"), d),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Experiment(ExperimentError::UnknownExperiment(_)) | RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    /// See [`ExperimentConfig::hash`].
    pub config_hash: u64,
    pub experiment: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<PathBuf>,
    /// Some hard assertion failed.
    pub failed: bool,
    pub failures: Vec<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        if self.failed {
            1
        } else {
            0
        }
    }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Resolved configuration plus warnings, as printed by `--dry-run`.
pub fn dry_run(cfg: &ExperimentConfig) -> Result<String, RunError> {
    cfg.experiment.parse::<ExperimentKind>()?;
    let mut text = cfg.resolved_json();
    for w in &cfg.warnings {
        text.push_str("\nwarning: ");
        text.push_str(w);
    }
    Ok(text)
}

/// Runs the configured experiment and writes its CSV files and the
/// `.meta.json` sidecar next to `cfg.out`.
pub fn dispatch(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunManifest, RunError> {
    let kind: ExperimentKind = cfg.experiment.parse()?;
    let started = now_ms();
    let result = experiments::run(kind, cfg, opts)?;
    let mut manifest = RunManifest {
        config_hash: cfg.hash(),
        experiment: kind.name().to_owned(),
        started_unix_ms: started,
        finished_unix_ms: 0,
        outputs: Vec::new(),
        failed: !result.failures.is_empty(),
        failures: result.failures.clone(),
    };
    manifest.outputs = write_tables(&cfg.out, cfg.output, &result)?;
    manifest.finished_unix_ms = now_ms();
    let meta_path = output::sibling(&cfg.out, ".meta.json");
    manifest.outputs.push(meta_path.clone());
    let meta = json!({
        "config": cfg.resolved,
        "seed": cfg.master_seed,
        "threads": opts.threads,
        "version": version_string(),
        "warnings": cfg.warnings,
        "timings_seconds": result.timings.iter().map(|(n, s)| json!({ "n": n, "seconds": s })).collect::<Vec<_>>(),
        "wall_clock_seconds": (manifest.finished_unix_ms - started) as f64 / 1000.0,
        "summary": result.summary,
        "manifest": manifest,
    });
    output::write_json(&meta_path, &meta)?;
    Ok(manifest)
}

fn write_tables(out: &Path, mode: OutputMode, result: &ExperimentOutput) -> Result<Vec<PathBuf>, OutputError> {
    let mut written = Vec::new();
    match mode {
        OutputMode::Aggregate => result.aggregate.write(out)?,
        OutputMode::Raw => result.raw.write(out)?,
    }
    written.push(out.to_owned());
    if mode == OutputMode::Aggregate {
        for (suffix, table) in &result.extra {
            let path = output::sibling(out, suffix);
            table.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}
