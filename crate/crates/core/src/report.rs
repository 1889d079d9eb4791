//! JSON and CSV rendering with stable field order and 12 significant digits.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds x to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Applies [`round_sig`] to every float inside `v`.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"), SIGNIFICANT_DIGITS);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Wilson score interval at 95% for a binomial proportion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Wilson {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub low: f64,
    pub high: f64,
}

pub fn wilson(successes: u64, trials: u64) -> Wilson {
    if trials == 0 {
        return Wilson { trials, successes, rate: 0.0, low: 0.0, high: 1.0 };
    }
    let z = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Wilson { trials, successes, rate: p, low, high }
}

/// A command's machine-readable output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: Option<u64>,
    pub passed: bool,
    pub records: Vec<Value>,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self { command: command.to_string(), seed, passed: true, records: Vec::new() }
    }

    /// Appends a record; `ok` = false fails the whole report.
    pub fn push(&mut self, record: impl Serialize, ok: bool) -> Result<()> {
        self.records.push(serde_json::to_value(record)?);
        self.passed &= ok;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&round_floats(serde_json::to_value(self)?))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        render_csv(&self.records)
    }

    /// Writes CSV for a `.csv` path and JSON otherwise.
    pub fn write(&self, path: &Path) -> Result<()> {
        let body = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) { self.to_csv()? } else { self.to_json()? };
        std::fs::write(path, body)?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(_) | Value::Bool(_) => v.to_string(),
        other => other.to_string(),
    }
}

/// One row per record; columns are the top-level keys in order of first
/// appearance, nested values as compact JSON.
pub fn render_csv(records: &[Value]) -> Result<String> {
    let rows: Vec<Map<String, Value>> = records
        .iter()
        .map(|r| match round_floats(r.clone()) {
            Value::Object(o) => o,
            other => Map::from_iter([("value".to_string(), other)]),
        })
        .collect();
    let mut columns: Vec<String> = Vec::new();
    for row in &rows {
        for k in row.keys() {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    if !columns.is_empty() {
        w.write_record(&columns)?;
    }
    for row in &rows {
        w.write_record(columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()))?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
