//! CSV tables, atomic file writes and the run manifest.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// An in-memory CSV table whose cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&'static str]) -> Self {
        Self {
            file: file.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }
}

/// Shortest decimal that round-trips, switching to exponent notation for
/// very large or small magnitudes.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Empty cell for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir.display(), e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path.display(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path.display(), e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub columns: Vec<&'static str>,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEntry {
    pub name: String,
    pub kind: &'static str,
    /// `ok` or `failed`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    pub wall_time_seconds: f64,
    pub files: Vec<FileEntry>,
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub tv_threshold: f64,
    pub target_fidelity: f64,
    pub t_a_search: &'static str,
    pub schedule: &'static str,
    pub mixing_time_unit: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub jobs: usize,
    pub wall_time_seconds: f64,
    pub conventions: Conventions,
    pub experiments: Vec<ExperimentEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
