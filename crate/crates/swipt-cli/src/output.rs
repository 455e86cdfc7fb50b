//! Rendering of command results and the run manifest.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use swipt_core::config::ScenarioFile;
use swipt_core::curve::Table;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One cell of a record table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Cell {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Cell {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Cell {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

/// Rows under a fixed header; every row has one cell per column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Records {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Records {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Records {
        Records {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a command produces.
#[derive(Debug, Clone)]
pub enum Output {
    /// Curves over a shared abscissa.
    Table(Table),
    Records(Records),
    /// A structured result with a flat CSV view.
    Document { value: Value, records: Records },
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match (self, format) {
            (Output::Table(t), Format::Csv) => {
                t.validate()?;
                Ok(t.to_csv_string()?.into_bytes())
            }
            (Output::Table(t), Format::Json) => {
                t.validate()?;
                json(t)
            }
            (Output::Records(r), Format::Csv) | (Output::Document { records: r, .. }, Format::Csv) => records_csv(r),
            (Output::Records(r), Format::Json) => json(r),
            (Output::Document { value, .. }, Format::Json) => json(value),
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(v).map_err(|e| CliError::Numerics(format!("serializing output: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn records_csv(r: &Records) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numerics(format!("writing CSV: {e}"));
    w.write_record(&r.columns).map_err(fail)?;
    for row in &r.rows {
        w.write_record(row.iter().map(|c| c.to_string())).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Numerics(format!("writing CSV: {e}")))
}

/// Everything needed to re-execute a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Subcommand words, e.g. `["reproduce-figure", "5a"]`.
    pub command: Vec<String>,
    pub seed: u64,
    /// Trials per simulated point; 0 when nothing was simulated.
    pub trials: usize,
    pub sweep: Option<String>,
    pub format: Format,
    pub threads: usize,
    /// Where the configuration came from.
    pub config_source: String,
    pub config: ScenarioFile,
    pub argv: Vec<String>,
    pub output: Option<PathBuf>,
    pub wall_time_s: f64,
    /// Windows and cap statistics of the simulated points.
    #[serde(default)]
    pub simulation: Vec<Value>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: not a run manifest: {e}", path.display())))
    }

    /// The manifest path that goes with an output path.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Numerics(format!("serializing manifest: {e}")))
    }
}

/// Writes `bytes` to `out`, or to stdout when absent.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}
