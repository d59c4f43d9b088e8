pub mod check;
pub mod compare;
pub mod gen;
pub mod run;

use std::path::Path;

use aepg_core::diagnostics::RunMetadata;
use aepg_core::{Error, RunLimits, RunOutput};
use anyhow::anyhow;
use serde::Serialize;

use crate::config::{ExperimentConfig, ResolvedMethod};
use crate::failure::{CmdResult, Failure};
use crate::io::{atomic_write, write_json};

pub const TRACE_FILE: &str = "trace.csv";
pub const META_FILE: &str = "meta.json";
pub const STATE_LOG_FILE: &str = "state_log.json";
pub const SOLUTION_FILE: &str = "solution.json";
pub const ABORT_FILE: &str = "abort_dump.json";

/// Contents of `meta.json`: the run metadata plus the configuration that
/// produced it.
#[derive(Serialize)]
struct MetaFile<'a> {
    #[serde(flatten)]
    run: &'a RunMetadata,
    label: &'a str,
    effective_config: &'a ExperimentConfig,
    resolved_method: &'a ResolvedMethod,
    limits: &'a RunLimits,
}

#[derive(Serialize)]
struct Solution<'a> {
    x: &'a [f64],
}

pub fn write_run(
    dir: &Path,
    out: &RunOutput<f64>,
    config: &ExperimentConfig,
    method: &ResolvedMethod,
    limits: &RunLimits,
) -> anyhow::Result<()> {
    let mut csv = Vec::new();
    out.trace.write_csv(&mut csv)?;
    atomic_write(&dir.join(TRACE_FILE), &csv)?;
    write_json(
        &dir.join(META_FILE),
        &MetaFile {
            run: &out.trace.meta,
            label: method.label(),
            effective_config: config,
            resolved_method: method,
            limits,
        },
    )?;
    write_json(
        &dir.join(SOLUTION_FILE),
        &Solution {
            x: out.solution.as_slice(),
        },
    )?;
    match &out.state_log {
        Some(log) => write_json(&dir.join(STATE_LOG_FILE), log)?,
        None => remove_stale(&dir.join(STATE_LOG_FILE))?,
    }
    remove_stale(&dir.join(ABORT_FILE))?;
    Ok(())
}

fn remove_stale(path: &Path) -> std::io::Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

/// Maps a failed run to a [`Failure`], writing the state dump on numeric abort.
pub fn run_failure(dir: &Path, err: Error) -> Failure {
    match err {
        Error::NumericAbort {
            iteration,
            reason,
            dump,
        } => {
            let path = dir.join(ABORT_FILE);
            if let Err(e) = write_json(&path, &dump) {
                return Failure::Runtime(e.context(format!("numeric abort at iteration {iteration}: {reason}")));
            }
            Failure::NumericAbort(anyhow!(
                "numeric abort at iteration {iteration}: {reason}; state dumped to {}",
                path.display()
            ))
        }
        other => other.into(),
    }
}

pub fn config_errors(cfg: &ExperimentConfig) -> CmdResult {
    let diags = cfg.diagnostics();
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure::config(format!("\n  {}", diags.join("\n  "))))
    }
}

/// Core-level validation of a resolved method, reported as a config error.
pub fn validate_method(m: &ResolvedMethod) -> CmdResult {
    let r = match m {
        ResolvedMethod::Aepg { config, .. } => config.validate(),
        ResolvedMethod::Baseline { config, .. } => config.validate(),
    };
    r.map_err(|e| Failure::config(format!("{}: {e}", m.label())))
}

pub fn create_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(anyhow::Error::from(e).context(format!("creating {}", dir.display()))))
}
