//! Configuration, tabular output and the command implementations behind
//! the `bennett` binary.
//!
//! Every command produces named [`Table`]s plus a short text summary.
//! Tables are written as CSV (shortest round-trip floats, LF endings,
//! header always present) or bundled into one JSON [`ReportEnvelope`].
//! Files are written atomically through a temporary file in the target
//! directory.

mod commands;
pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use commands::{cmd_complexity, cmd_constants, cmd_eval, cmd_invert, cmd_rates, cmd_simulate};
pub use config::RunConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BENNETT_OUT_DIR";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ReportError {
    pub(crate) fn compute<E: std::fmt::Display>(e: E) -> Self {
        ReportError::Compute(e.to_string())
    }
}

/// How a command finished. Hard errors are [`ReportError`]s instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    /// Some results carry violated preconditions.
    PreconditionFlagged,
    /// A Monte Carlo validity check failed.
    ValidityFail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::PreconditionFlagged => 2,
            Status::ValidityFail => 3,
        }
    }
}

/// Exit code for hard errors (usage, config, I/O).
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Normalizes −0.0.
            Cell::Num(v) if *v == 0.0 => "0.0".into(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(_) | Cell::Empty => s.serialize_none(),
            Cell::Int(v) => s.serialize_u64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Tables and summary lines produced by one command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub command: &'static str,
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    pub status: Status,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Serialize)]
pub struct ReportEnvelope<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub timestamp: String,
    pub status: Status,
    pub payload: &'a [Table],
    pub summary: &'a [String],
    pub provenance: &'a [String],
}

/// Write `contents` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the command's tables into `out_dir`; returns the written paths.
pub fn emit(output: &CommandOutput, config: &RunConfig, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>, ReportError> {
    match format {
        Format::Csv => output
            .tables
            .iter()
            .map(|t| {
                let path = out_dir.join(format!("{}.csv", t.name));
                write_atomic(&path, t.to_csv().as_bytes())?;
                Ok(path)
            })
            .collect(),
        Format::Json => {
            let envelope = ReportEnvelope {
                version: env!("CARGO_PKG_VERSION"),
                command: output.command,
                config,
                timestamp: chrono::Utc::now().to_rfc3339(),
                status: output.status,
                payload: &output.tables,
                summary: &output.summary,
                provenance: &output.provenance,
            };
            let mut text = serde_json::to_string_pretty(&envelope).map_err(ReportError::compute)?;
            text.push('\n');
            let path = out_dir.join(format!("{}.json", output.command));
            write_atomic(&path, text.as_bytes())?;
            Ok(vec![path])
        }
    }
}

/// `--out` if given, else the environment variable, else `out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
