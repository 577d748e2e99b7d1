//! Tabular output as CSV or JSON Lines.
//!
//! CSV output starts with the resolved configuration as `#` comment lines,
//! then a header row and the records; the summary follows as trailing `#`
//! lines. Reals are written with 17 significant digits.
//!
//! JSON output is one object per line: `{"config": ...}`, then one object
//! per record, then `{"summary": ...}`.

use serde_json::{Map, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => real(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// `x` with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report { columns: columns.to_vec(), rows: Vec::new(), summary: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn render(&self, command: &str, config: &RunConfig) -> Result<String> {
        match config.output_format {
            OutputFormat::Csv => self.render_csv(command, config),
            OutputFormat::Json => self.render_json(command, config),
        }
    }

    fn render_csv(&self, command: &str, config: &RunConfig) -> Result<String> {
        let mut out = format!("# hexlat {command}\n");
        for (k, v) in config.entries() {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&body));
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k} = {}\n", v.csv()));
        }
        Ok(out)
    }

    fn render_json(&self, command: &str, config: &RunConfig) -> Result<String> {
        let mut cfg = Map::new();
        cfg.insert("command".into(), Value::from(command));
        for (k, v) in config.entries() {
            cfg.insert(k.into(), Value::from(v));
        }
        let mut out = serde_json::to_string(&Value::Object(Map::from_iter([("config".to_string(), Value::Object(cfg))])))?;
        out.push('\n');
        for row in &self.rows {
            let obj: Map<String, Value> =
                self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
            out.push_str(&serde_json::to_string(&Value::Object(obj))?);
            out.push('\n');
        }
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        out.push_str(&serde_json::to_string(&Value::Object(Map::from_iter([("summary".to_string(), Value::Object(summary))])))?);
        out.push('\n');
        Ok(out)
    }
}
