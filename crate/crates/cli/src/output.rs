//! Tabular output in CSV or JSON.
//!
//! CSV: `#`-prefixed metadata lines (resolved parameters and seed), then a
//! header row, then one record per line. Floats are printed with 17
//! significant digits so every 64-bit value round-trips exactly.
//!
//! JSON: one object {"meta": {...}, "records": [...]} with sorted keys;
//! floats use the shortest round-trip representation.
//!
//! Neither format carries timestamps, so identical runs are byte-identical.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    /// Empty CSV field / JSON null.
    Blank,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

/// One run's worth of output: resolved-parameter metadata plus records.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::UInt(v) => v.to_string(),
        Cell::Float(v) => fmt_f64(*v),
        Cell::Str(s) => s.clone(),
        Cell::Blank => String::new(),
    }
}

pub fn write_csv(table: &Table, w: &mut dyn Write) -> io::Result<()> {
    for (k, v) in &table.meta {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(csv_cell).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

fn json_cell(c: &Cell) -> serde_json::Value {
    match c {
        Cell::UInt(v) => serde_json::Value::from(*v),
        Cell::Float(v) => serde_json::Number::from_f64(*v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
        Cell::Str(s) => serde_json::Value::String(s.clone()),
        Cell::Blank => serde_json::Value::Null,
    }
}

pub fn write_json(table: &Table, w: &mut dyn Write) -> io::Result<()> {
    let mut meta = serde_json::Map::new();
    for (k, v) in &table.meta {
        meta.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let records: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (col, cell) in table.columns.iter().zip(row) {
                obj.insert(col.to_string(), json_cell(cell));
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    let mut root = serde_json::Map::new();
    root.insert("meta".to_string(), serde_json::Value::Object(meta));
    root.insert("records".to_string(), serde_json::Value::Array(records));
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(root))?;
    writeln!(w, "{text}")
}

pub fn write(table: &Table, format: Format, w: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(table, w),
        Format::Json => write_json(table, w),
    }
}
