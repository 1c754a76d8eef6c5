//! CSV and JSON rendering.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

/// Twelve significant digits in scientific notation.
pub fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one run: a table for CSV and a domain object for JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub kind: String,
    pub table: Table,
    pub json: serde_json::Value,
}

impl Artifact {
    pub fn new(kind: impl Into<String>, table: Table, data: &impl Serialize) -> CliResult<Self> {
        Ok(Self {
            kind: kind.into(),
            table,
            json: serde_json::to_value(data).map_err(|e| CliError::Config(e.to_string()))?,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let env = Envelope {
                    schema_version: SCHEMA_VERSION,
                    kind: self.kind.clone(),
                    data: &self.json,
                };
                let mut s = serde_json::to_string_pretty(&env).expect("values serialize");
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub kind: String,
    pub data: T,
}

/// Reads back a JSON artifact.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<Envelope<T>> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Writes to `path`, or to stdout when `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p.display(), e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("stdout", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_num(0.1), "1.00000000000e-1");
        assert_eq!(format_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_num(0.0), "0.00000000000e0");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["t", "delta_N"]);
        assert_eq!(t.to_csv(), "t,delta_N\n");
    }

    #[test]
    fn json_envelope_round_trip() {
        let a = Artifact::new("demo", Table::default(), &vec![1.5, 2.25]).unwrap();
        let back: Envelope<Vec<f64>> = parse_json(&a.render(Format::Json)).unwrap();
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        assert_eq!(back.kind, "demo");
        assert_eq!(back.data, vec![1.5, 2.25]);
    }
}
