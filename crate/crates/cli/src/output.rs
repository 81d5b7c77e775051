//! Table rendering. CSV files carry one `#` header line with the column names
//! and the run configuration; floats are written with 17 significant digits
//! so that every value round-trips exactly.

use std::fs;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// An undefined value: an empty CSV field, `null` in JSON.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Comment lines appended after the data in CSV output.
    pub notes: Vec<String>,
    /// Extra top-level fields of the JSON document.
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `{:.16e}` with negative zero folded into zero.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn json_float(x: f64) -> Value {
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => fmt_float(*x),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => json!(i),
        Cell::Float(x) => json_float(*x),
        Cell::Text(s) => json!(s),
        Cell::Missing => Value::Null,
    }
}

pub fn render_csv(table: &Table, config: &RunConfig) -> String {
    let mut out = format!("# {} | {}\n", table.columns.join(","), config.echo());
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in &table.rows {
        writer
            .write_record(row.iter().map(cell_text))
            .expect("writing to memory");
    }
    let body = writer.into_inner().expect("flushing to memory");
    out.push_str(std::str::from_utf8(&body).expect("fields are UTF-8"));
    for note in &table.notes {
        out.push_str("# ");
        out.push_str(note);
        out.push('\n');
    }
    out
}

pub fn render_json(table: &Table, config: &RunConfig) -> String {
    let mut doc = Map::new();
    doc.insert("config".into(), config.to_json());
    doc.insert("columns".into(), json!(table.columns));
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(cell_json).collect()))
        .collect();
    doc.insert("rows".into(), Value::Array(rows));
    for (k, v) in &table.extra {
        doc.insert(k.clone(), v.clone());
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn render(table: &Table, config: &RunConfig, format: Format) -> String {
    match format {
        Format::Csv => render_csv(table, config),
        Format::Json => render_json(table, config),
    }
}

/// Writes to the named file, or to standard output for `-`.
pub fn write_to(path: &str, text: &str) -> io::Result<()> {
    if path == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(text.as_bytes())?;
        lock.flush()
    } else {
        fs::write(path, text)
    }
}

/// Shared float formatter for JSON extras.
pub fn float_value(x: f64) -> Value {
    json_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6f64.sqrt()] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quotes_text_and_leaves_missing_empty() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Text("x, y".into()), Cell::Missing, Cell::Int(3)]);
        t.notes.push("done".into());
        let cfg = RunConfig::new("test");
        let text = render_csv(&t, &cfg);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# a,b,c | command=test");
        assert_eq!(lines[1], "\"x, y\",,3");
        assert_eq!(lines[2], "# done");
    }
}
