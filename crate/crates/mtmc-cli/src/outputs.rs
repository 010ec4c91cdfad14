//! Report files: CSV for curves and traces, JSON for structured summaries.
//!
//! Every file carries the same identification block — scenario name, seed,
//! library version, schema version — so any artifact found on disk explains
//! where it came from. CSV files carry it as `#`-prefixed preamble lines
//! before the header row; JSON files carry the same fields at the top
//! level. All numeric output uses shortest round-trip formatting and all
//! content is a pure function of (config, seed), which is what makes
//! rerun-and-diff a meaningful integrity check.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::RuntimeError;

/// The identification block every output embeds.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub library_version: String,
}

impl Metadata {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Metadata {
            schema_version: crate::config::SCHEMA_VERSION,
            scenario: scenario.to_string(),
            seed,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Creates the output directory if needed and returns the path of `name`
/// inside it.
pub fn prepare_path(dir: &Path, name: &str, scenario: &str) -> Result<PathBuf, RuntimeError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        RuntimeError::new(
            scenario,
            format!("cannot create output directory `{}`: {e}", dir.display()),
        )
    })?;
    Ok(dir.join(name))
}

/// Opens a CSV file and writes the metadata preamble; the returned writer is
/// positioned at the header row.
pub fn csv_file(path: &Path, metadata: &Metadata) -> Result<BufWriter<File>, RuntimeError> {
    let file = File::create(path).map_err(|e| {
        RuntimeError::new(
            &metadata.scenario,
            format!("cannot create `{}`: {e}", path.display()),
        )
    })?;
    let mut writer = BufWriter::new(file);
    write_preamble(&mut writer, metadata).map_err(|e| {
        RuntimeError::new(
            &metadata.scenario,
            format!("cannot write `{}`: {e}", path.display()),
        )
    })?;
    Ok(writer)
}

fn write_preamble<W: Write>(writer: &mut W, metadata: &Metadata) -> std::io::Result<()> {
    writeln!(writer, "# scenario: {}", metadata.scenario)?;
    writeln!(writer, "# seed: {}", metadata.seed)?;
    writeln!(writer, "# library_version: {}", metadata.library_version)?;
    writeln!(writer, "# schema_version: {}", metadata.schema_version)?;
    Ok(())
}

/// Writes a JSON report with stable key order (struct declaration order)
/// and a trailing newline.
pub fn json_file<T: Serialize>(
    path: &Path,
    scenario: &str,
    report: &T,
) -> Result<(), RuntimeError> {
    let file = File::create(path).map_err(|e| {
        RuntimeError::new(scenario, format!("cannot create `{}`: {e}", path.display()))
    })?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, report).map_err(|e| {
        RuntimeError::new(scenario, format!("cannot write `{}`: {e}", path.display()))
    })?;
    writer.write_all(b"\n").map_err(|e| {
        RuntimeError::new(scenario, format!("cannot write `{}`: {e}", path.display()))
    })?;
    Ok(())
}

/// Renders an optional float as a CSV field: shortest round-trip form, or
/// the empty field when absent.
pub fn optional_field(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}
