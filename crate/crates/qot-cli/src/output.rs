//! Tabular artifacts and their CSV / JSON encodings.
//!
//! Every file starts with the engine version, the config hash and the NLI
//! backend tag; the body depends only on the numbers, so identical configs
//! give byte-identical bodies.

use crate::config::Format;
use crate::{CliError, ENGINE};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // NaN and ±inf have no JSON encoding
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// One output table; `name` becomes the file stem.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Provenance written ahead of every artifact.
#[derive(Clone, Debug)]
pub struct Meta {
    pub config_sha256: String,
    pub backend: String,
}

impl Artifact {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV body without the provenance lines.
    pub fn csv_body(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    pub fn to_csv(&self, meta: &Meta) -> String {
        format!("# engine={ENGINE}\n# config_sha256={}\n# backend={}\n{}", meta.config_sha256, meta.backend, self.csv_body())
    }

    pub fn to_json(&self, meta: &Meta) -> String {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let v = json!({
            "engine": ENGINE,
            "config_sha256": meta.config_sha256,
            "backend": meta.backend,
            "name": self.name,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&v).expect("json encodes") + "\n"
    }

    pub fn write(&self, dir: &Path, format: Format, meta: &Meta) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        let (ext, text) = match format {
            Format::Csv => ("csv", self.to_csv(meta)),
            Format::Json => ("json", self.to_json(meta)),
        };
        let path = dir.join(format!("{}.{ext}", self.name));
        std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }
}
