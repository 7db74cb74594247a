//! Tables written as CSV or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::OutputFormat;
use crate::error::CliResult;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PN_ATOM_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Cell {
    /// CSV text: reals in scientific notation with 17 significant digits.
    pub fn csv_text(&self) -> String {
        match self {
            Self::Real(v) => format!("{v:.16e}"),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Text(String::new()), Self::Real)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Panics on a row of the wrong width.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub name: &'static str,
    pub table: Table,
    pub json: Value,
    /// False when a physics check failed.
    pub passed: bool,
    /// One-line notes for the terminal.
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    pub fn render(&self, format: OutputFormat) -> CliResult<Vec<u8>> {
        match format {
            OutputFormat::Csv => self.table.to_csv(),
            OutputFormat::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.json)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }

    pub fn write(&self, dir: &Path, format: OutputFormat) -> CliResult<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        fs::write(&path, self.render(format)?)?;
        Ok(path)
    }
}
