//! CSV, JSON and gnuplot rendering of result tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const UNITS_LINE: &str = "# units: hbar=kB=Delta=1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// 17 significant digits in scientific notation; `-0` prints as `0`.
pub fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// A rendered result: header, rows, the parameter echo and a JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
    /// Row-level failures, reported after the output is written.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(params: &impl Serialize, columns: Vec<String>) -> Self {
        Report {
            params: serde_json::to_value(params).expect("parameters serialize to JSON"),
            columns,
            rows: Vec::new(),
            summary: Value::Null,
            failures: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(UNITS_LINE);
        out.push('\n');
        let _ = writeln!(out, "# params: {}", self.params);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let doc = json!({
            "units": "hbar=kB=Delta=1",
            "params": self.params,
            "summary": self.summary,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    /// A gnuplot script plotting every column against the first.
    pub fn gnuplot_script(&self, data: &Path) -> String {
        let name = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key autotitle columnhead\n");
        let _ = writeln!(s, "set xlabel '{}'", self.columns.first().map(String::as_str).unwrap_or("x"));
        let _ = writeln!(s, "plot for [i=2:{}] '{}' using 1:i with lines", self.columns.len(), name);
        s
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
