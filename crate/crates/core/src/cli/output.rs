use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::io::format_real;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite reals become null
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A command's result rows plus the provenance line written ahead of them.
#[derive(Clone, Debug)]
pub struct Table {
    pub command: &'static str,
    pub seed: u64,
    pub depth: Option<u32>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(command: &'static str, seed: u64, depth: Option<u32>, columns: &[S]) -> Self {
        Table { command, seed, depth, columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn provenance(&self) -> String {
        match self.depth {
            Some(d) => format!("dymart {} seed={} depth={}", self.command, self.seed, d),
            None => format!("dymart {} seed={}", self.command, self.seed),
        }
    }

    pub fn write<W: Write>(&self, mut out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "# {}", self.provenance())?;
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let fields: Vec<String> = row.iter().map(Cell::to_csv).collect();
                    writeln!(out, "{}", fields.join(","))?;
                }
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = Map::new();
                        for (col, cell) in self.columns.iter().zip(row) {
                            obj.insert(col.clone(), cell.to_json());
                        }
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "seed": self.seed,
                    "depth": self.depth,
                    "records": records,
                });
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            }
        }
        out.flush()
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>, format: Format) -> std::io::Result<()> {
        match path {
            Some(p) => self.write(BufWriter::new(File::create(p)?), format),
            None => self.write(BufWriter::new(std::io::stdout().lock()), format),
        }
    }
}
