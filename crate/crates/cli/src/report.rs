//! Check records, suite reports and CSV plot data.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Echo;
use crate::CliError;

/// How `computed` is compared with `expected`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    /// `|c − e| ≤ tol`.
    Absolute,
    /// `|c − e| ≤ tol·|e|`.
    Relative,
    /// `|ln c − ln e| ≤ ln tol`, for a multiplicative band of width `tol`.
    Factor,
}

impl Norm {
    pub fn passes(self, computed: f64, expected: f64, tolerance: f64) -> bool {
        match self {
            Norm::Absolute => (computed - expected).abs() <= tolerance,
            Norm::Relative => (computed - expected).abs() <= tolerance * expected.abs(),
            Norm::Factor => {
                computed > 0.0 && expected > 0.0 && (computed.ln() - expected.ln()).abs() <= tolerance.ln()
            }
        }
    }
}

/// Plot data produced by a check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
    /// Scalars derived from the rows, such as a fitted slope.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, f64>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            fields: BTreeMap::new(),
        }
    }

    pub fn row(mut self, r: Vec<f64>) -> Self {
        self.rows.push(r);
        self
    }

    pub fn with_field(mut self, k: &str, v: f64) -> Self {
        self.fields.insert(k.to_string(), v);
        self
    }
}

/// Result of one check, before it is named and timed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub computed: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub norm: Norm,
    /// Set when the check could not be computed or a precondition failed.
    pub message: Option<String>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn new(computed: f64, expected: f64, tolerance: f64, norm: Norm) -> Self {
        Self {
            computed: Some(computed),
            expected,
            tolerance,
            norm,
            message: None,
            tables: Vec::new(),
        }
    }

    pub fn error(err: impl std::fmt::Display, expected: f64, tolerance: f64, norm: Norm) -> Self {
        Self {
            computed: None,
            expected,
            tolerance,
            norm,
            message: Some(err.to_string()),
            tables: Vec::new(),
        }
    }

    pub fn with_message(mut self, m: impl Into<String>) -> Self {
        self.message = Some(m.into());
        self
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }

    /// A check passes when it was computed, carries no failure message and
    /// meets its tolerance.
    pub fn passed(&self) -> bool {
        self.message.is_none()
            && self
                .computed
                .is_some_and(|c| self.norm.passes(c, self.expected, self.tolerance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub computed: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub norm: Norm,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRecord {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub header: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, f64>,
}

/// Deterministic part of a run: identical inputs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<TableRecord>,
    pub config: BTreeMap<String, Echo>,
}

/// Wall-clock data, kept out of the report so reports compare byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub suite: String,
    pub wall_seconds: f64,
    pub checks: Vec<(String, f64)>,
}

/// Write `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| format!(".{}.tmp", n.to_string_lossy()))
        .unwrap_or_else(|| ".tmp".into());
    tmp.set_file_name(name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Write a table as CSV. An empty table gives a header-only file.
pub fn emit_plot_data(table: &Table, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(path, &bytes)
}
