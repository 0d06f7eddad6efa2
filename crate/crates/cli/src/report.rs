use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

/// JSON number printed with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Flag(bool),
    Int(u64),
    Real(f64),
    Missing,
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Flag(b) => Value::from(*b),
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => num(*x),
            Cell::Missing => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) if x.is_finite() => num(*x).to_string(),
            Cell::Real(x) => x.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Real)
    }
}

pub type Record = Vec<(&'static str, Cell)>;

/// A command's output: the resolved config, one table and a list of summary values.
#[derive(Clone, Debug)]
pub struct Report {
    pub config: Value,
    pub table_name: &'static str,
    pub table: Vec<Record>,
    pub summary_name: &'static str,
    pub summary: Vec<(String, Cell)>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("config".into(), self.config.clone());
        let rows = self
            .table
            .iter()
            .map(|r| Value::Object(r.iter().map(|(k, v)| ((*k).to_string(), v.to_json())).collect()))
            .collect();
        root.insert(self.table_name.into(), Value::Array(rows));
        let summary = self
            .summary
            .iter()
            .map(|(k, v)| {
                let mut m = Map::new();
                m.insert("name".into(), k.clone().into());
                m.insert("value".into(), v.to_json());
                Value::Object(m)
            })
            .collect();
        root.insert(self.summary_name.into(), Value::Array(summary));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Value::Object(m) = &self.config {
            for (k, v) in m {
                let _ = writeln!(out, "# config.{k}: {v}");
            }
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {}.{k}: {}", self.summary_name, v.to_csv());
        }
        if let Some(first) = self.table.first() {
            let header: Vec<&str> = first.iter().map(|(k, _)| *k).collect();
            let _ = writeln!(out, "{}", header.join(","));
            for r in &self.table {
                let cells: Vec<String> = r.iter().map(|(_, v)| v.to_csv()).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        out
    }
}
