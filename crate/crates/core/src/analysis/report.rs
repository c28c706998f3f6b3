//! Tabular reports written as CSV or JSON, each with a metadata sidecar.
//!
//! A [`Report`] is a list of named columns, rows of JSON scalars, a summary
//! map and the run metadata. CSV holds the rows only; JSON holds everything.
//! Numbers are written in shortest round-trip form in both, so the two
//! formats agree exactly on every row cell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
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
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

/// Seed and resolution behind every cell of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub dim: usize,
    pub points: usize,
    pub dt: f64,
    pub sobolev_order: u32,
    /// Further settings specific to the report kind.
    #[serde(default)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub meta: ReportMeta,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    #[serde(default)]
    pub summary: Map<String, Value>,
}

/// A non-finite float becomes `null`.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Report {
    pub fn new(kind: &str, meta: ReportMeta, columns: &[&str]) -> Self {
        Self {
            kind: kind.to_string(),
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Column `name` as floats; `None` if absent or any cell is not a number.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[j].as_f64()).collect()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        other => {
            let s = other.to_string();
            format!("\"{}\"", s.replace('"', "\"\""))
        }
    }
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emitted {
    pub report: PathBuf,
    pub sidecar: PathBuf,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    kind: &'a str,
    format: Format,
    file: String,
    meta: &'a ReportMeta,
    columns: &'a [String],
    summary: &'a Map<String, Value>,
}

/// Writes `<dir>/<stem>.<ext>` and `<dir>/<stem>.<ext>.meta.json`.
pub fn emit_report(report: &Report, format: Format, dir: &Path, stem: &str) -> Result<Emitted> {
    std::fs::create_dir_all(dir)?;
    let file = format!("{stem}.{}", format.extension());
    let path = dir.join(&file);
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    std::fs::write(&path, body)?;
    let sidecar = dir.join(format!("{file}.meta.json"));
    let meta = Sidecar {
        kind: &report.kind,
        format,
        file,
        meta: &report.meta,
        columns: &report.columns,
        summary: &report.summary,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    std::fs::write(&sidecar, text)?;
    Ok(Emitted {
        report: path,
        sidecar,
    })
}

/// Two whitespace-separated columns with a `#` header line, for plotting.
pub fn emit_two_column(path: &Path, header: (&str, &str), points: &[(f64, f64)]) -> Result<()> {
    let mut out = format!("# {} {}\n", header.0, header.1);
    for (x, y) in points {
        let _ = writeln!(out, "{} {}", number(*x), number(*y));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let meta = ReportMeta {
            seed: 1,
            dim: 1,
            points: 64,
            dt: 1e-3,
            sobolev_order: 3,
            extra: Map::new(),
        };
        let mut r = Report::new("test", meta, &["n", "x", "note"]);
        r.push_row(vec![Value::from(8), number(0.1 + 0.2), Value::from("a,b")]);
        r.push_row(vec![Value::from(16), number(1e-300), Value::from("plain")]);
        r.summarize("slope", -0.5);
        r
    }

    #[test]
    fn csv_round_trips_floats() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,x,note");
        assert_eq!(lines[1], "8,0.30000000000000004,\"a,b\"");
        let x: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x, 1e-300);
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.column("x").unwrap(), vec![0.1 + 0.2, 1e-300]);
        assert!(back.column("note").is_none());
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(number(f64::NAN), Value::Null);
        assert_eq!(csv_cell(&number(f64::INFINITY)), "");
    }

    #[test]
    fn emits_report_and_sidecar() {
        let dir = std::env::temp_dir().join(format!("softkill-report-{}", std::process::id()));
        let out = emit_report(&sample(), Format::Csv, &dir, "t").unwrap();
        assert!(out.report.ends_with("t.csv"));
        let side: Value =
            serde_json::from_str(&std::fs::read_to_string(&out.sidecar).unwrap()).unwrap();
        assert_eq!(side["meta"]["seed"], 1);
        assert_eq!(side["summary"]["slope"], -0.5);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
