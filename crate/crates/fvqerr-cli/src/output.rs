//! Deterministic CSV and manifest emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub use fvqerr::bath::fmt_float;

/// CSV writer with a fixed float format: `.` decimal separator, scientific
/// notation below 1e-4 in magnitude.
pub struct CsvFile {
    writer: BufWriter<File>,
    pub path: PathBuf,
    columns: usize,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", header.join(","))
            .map_err(|e| CliError::Config(format!("write failed: {e}")))?;
        Ok(Self {
            writer,
            path,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        assert_eq!(fields.len(), self.columns, "column count mismatch");
        writeln!(self.writer, "{}", fields.join(","))
            .map_err(|e| CliError::Config(format!("write failed: {e}")))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::Config(format!("flush failed: {e}")))?;
        Ok(self.path)
    }
}

/// Run manifest: the config echo plus tool version, timing, and outputs.
/// Everything in the CSVs is reproducible from the manifest contents.
#[derive(Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
