use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const UNITS: &str = "hbar = J = 1; times in units of hbar/J";

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Compact JSON whose floats always carry 17 significant digits.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("serializing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// `result` fields at the top level, plus `schema_version` and `metadata`.
pub fn envelope(result: Value, metadata: Value) -> Value {
    let mut map = match result {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("metadata".into(), metadata);
    Value::Object(map)
}

pub fn error_json(kind: &str, message: &str, exit_code: i32) -> String {
    to_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": kind, "message": message, "exit_code": exit_code },
    }))
}

/// A CSV table with a fixed header.
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    F(f64),
    I(i64),
    Empty,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(v) => fmt_f64(*v),
                    Cell::I(v) => v.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn gnuplot_path(out: &Path) -> PathBuf {
    out.with_extension("gp")
}

/// Plot script for column `y` against column 1 of `data`.
pub fn gnuplot_script(data: &Path, title: &str, ylabel: &str, y: usize) -> String {
    let name = data.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 't_f'\n\
         set ylabel '{ylabel}'\n\
         plot '{name}' using 1:{y} with lines\n"
    )
}

pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    std::fs::write(path, contents)
}
