//! Deterministic result files: CSV with 9 significant digits, JSON with the
//! embedded run record, and a sidecar record for CSV outputs.
//!
//! Every numeric cell is checked finite before serialization; a NaN or
//! infinity anywhere is a numerical-non-convergence error, never a value in
//! an output file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{OutputFormat, ResolvedConfig};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("non-finite value in column `{column}` of row {row}")]
    NonFinite { column: String, row: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// A numeric cell or an empty cell (analytic value not defined).
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

/// Decimal scientific notation with 9 significant digits.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// A rectangular result table with a fixed, documented column set.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn check_finite(&self) -> Result<(), OutputError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (cell, column) in row.iter().zip(&self.columns) {
                if let Cell::Num(x) = cell {
                    if !x.is_finite() {
                        return Err(OutputError::NonFinite {
                            column: column.to_string(),
                            row: i,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn csv_bytes(&self) -> Result<Vec<u8>, OutputError> {
        self.check_finite()?;
        let mut out = Vec::new();
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => sig9(*x),
                    Cell::Int(x) => x.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(out)
    }

    fn json_rows(&self) -> Result<serde_json::Value, OutputError> {
        self.check_finite()?;
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (cell, column) in row.iter().zip(&self.columns) {
                    let v = match cell {
                        Cell::Num(x) => serde_json::json!(x),
                        Cell::Int(x) => serde_json::json!(x),
                        Cell::Empty => serde_json::Value::Null,
                    };
                    obj.insert(column.to_string(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        Ok(serde_json::Value::Array(rows))
    }
}

/// One experiment's output set: named tables plus a summary.
pub struct RunOutput {
    pub config: ResolvedConfig,
    /// (file tag, table); a single-table run uses the empty tag.
    pub tables: Vec<(String, Table)>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl RunOutput {
    /// Output path for a table tag: the empty tag maps to `out` itself,
    /// otherwise the tag is inserted before the extension.
    fn path_for(&self, tag: &str) -> PathBuf {
        let base = Path::new(&self.config.out);
        if tag.is_empty() {
            return base.to_path_buf();
        }
        let stem = base
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let ext = base
            .extension()
            .map(|s| format!(".{}", s.to_string_lossy()))
            .unwrap_or_default();
        base.with_file_name(format!("{stem}-{tag}{ext}"))
    }

    /// Write all result files; returns the list of paths written.
    pub fn write(&self) -> Result<Vec<PathBuf>, OutputError> {
        let mut written = Vec::new();
        match self.config.format {
            OutputFormat::Csv => {
                for (tag, table) in &self.tables {
                    let path = self.path_for(tag);
                    std::fs::write(&path, table.csv_bytes()?)?;
                    written.push(path);
                }
                // sidecar run record
                let record_path = Path::new(&self.config.out).with_extension("run.json");
                let record = serde_json::json!({
                    "config": self.config.record(),
                    "outputs": written
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>(),
                    "summary": self.summary,
                });
                std::fs::write(&record_path, pretty_json(&record)?)?;
                written.push(record_path);
            }
            OutputFormat::Json => {
                let mut tables = serde_json::Map::new();
                for (tag, table) in &self.tables {
                    let key = if tag.is_empty() { "rows" } else { tag };
                    tables.insert(key.to_string(), table.json_rows()?);
                }
                let doc = serde_json::json!({
                    "config": self.config.record(),
                    "summary": self.summary,
                    "tables": tables,
                });
                let path = Path::new(&self.config.out).to_path_buf();
                std::fs::write(&path, pretty_json(&doc)?)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

fn pretty_json(value: &serde_json::Value) -> Result<Vec<u8>, OutputError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
