//! Deterministic table output: CSV with C-style `%.12e` floats, or JSON as
//! an array of records. Re-running a command with the same settings must
//! produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Num(f64),
    /// Missing values print as an empty CSV field / JSON null.
    OptNum(Option<f64>),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::OptNum(v)
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// C-style `%.12e` formatting: two-digit (minimum) signed exponent.
pub fn fmt_e(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Write `table` as `<base>.<ext>` under `dir`, creating `dir` as needed.
pub fn write_table(dir: &Path, base: &str, format: Format, table: &Table) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{base}.{}", format.extension()));
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            writeln!(out, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let fields: Vec<String> = row
                    .iter()
                    .map(|cell| match cell {
                        Cell::Num(v) => fmt_e(*v),
                        Cell::OptNum(Some(v)) => fmt_e(*v),
                        Cell::OptNum(None) => String::new(),
                    })
                    .collect();
                writeln!(out, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            let records: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (col, cell) in table.columns.iter().zip(row) {
                        let value = match cell {
                            Cell::Num(v) | Cell::OptNum(Some(v)) => serde_json::Number::from_f64(*v)
                                .map(serde_json::Value::Number)
                                .unwrap_or(serde_json::Value::Null),
                            Cell::OptNum(None) => serde_json::Value::Null,
                        };
                        obj.insert((*col).to_string(), value);
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &records)?;
            out.push(b'\n');
        }
    }
    fs::write(&path, out)?;
    Ok(path)
}
