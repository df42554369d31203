//! Artifact writing: a run-header JSON and the experiment CSV next to
//! each other under the configured output base path.

use crate::config::{runtime, CliError};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Run header recording everything needed to reproduce the run.
#[derive(Debug, Serialize)]
pub struct RunHeader<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config: C,
}

impl<C: Serialize> RunHeader<C> {
    pub fn new(experiment: &'static str, seed: u64, threads: Option<usize>, config: C) -> Self {
        Self {
            tool: "stabsim",
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed,
            threads,
            config,
        }
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(runtime)?;
        }
    }
    Ok(())
}

/// Writes `<base>.json` with the run header.
pub fn write_header<C: Serialize>(base: &Path, header: &RunHeader<C>) -> Result<(), CliError> {
    let path = base.with_extension("json");
    ensure_parent(&path)?;
    let text = serde_json::to_string_pretty(header).map_err(runtime)?;
    std::fs::write(&path, text + "\n").map_err(runtime)
}

/// Writes `<base>.csv` from a header line and preformatted rows.
pub fn write_csv(base: &Path, header: &str, rows: &[String]) -> Result<PathBuf, CliError> {
    let path = base.with_extension("csv");
    ensure_parent(&path)?;
    let file = std::fs::File::create(&path).map_err(runtime)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{header}").map_err(runtime)?;
    for row in rows {
        writeln!(out, "{row}").map_err(runtime)?;
    }
    out.flush().map_err(runtime)?;
    Ok(path)
}

/// Writes a plain-text artifact as `<base>.txt`.
pub fn write_text(base: &Path, text: &str) -> Result<PathBuf, CliError> {
    let path = base.with_extension("txt");
    ensure_parent(&path)?;
    std::fs::write(&path, text).map_err(runtime)?;
    Ok(path)
}
