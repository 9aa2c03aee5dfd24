use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Rounds every non-integer number in `v` to 12 significant digits.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64 number"));
            *n = Number::from_f64(x).expect("finite");
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn rows_of(v: &Value) -> Vec<&Map<String, Value>> {
    match v {
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        Value::Object(map) => vec![map],
        _ => Vec::new(),
    }
}

/// CSV with the first row's keys as header; nested values become JSON text.
pub fn to_csv(v: &Value) -> Result<String, CliError> {
    let rows = rows_of(v);
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        let header: Vec<&String> = first.keys().collect();
        w.write_record(&header)?;
        for row in &rows {
            let record: Vec<String> = header
                .iter()
                .map(|k| row.get(*k).map(cell).unwrap_or_default())
                .collect();
            w.write_record(&record)?;
        }
    } else if !v.is_null() {
        w.write_record(["value"])?;
        w.write_record([cell(v)])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new("IoError", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(mut v: Value, format: Format) -> Result<String, CliError> {
    round_value(&mut v);
    match format {
        Format::Json => Ok(format!("{v}\n")),
        Format::Csv => to_csv(&v),
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
