use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where machine-readable output goes, and where the human summary goes as a result.
pub struct Sink<'a> {
    pub out: Option<&'a Path>,
    pub format: Format,
}

impl Sink<'_> {
    /// Writes `payload` to `--out` (or stdout) and the summary to whichever
    /// stream the payload did not take.
    pub fn emit<S: Serialize>(&self, payload: &S, summary: &str) -> Result<()> {
        let value = serde_json::to_value(payload)?;
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(&value)? + "\n",
            Format::Csv => to_csv(&value)?,
        };
        self.write_raw(&text, summary)
    }

    pub fn write_raw(&self, text: &str, summary: &str) -> Result<()> {
        match self.out {
            Some(path) => {
                write_file(path, text)?;
                println!("{summary}");
                println!("wrote {}", path.display());
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                eprintln!("{summary}");
            }
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// An object becomes one row; an array of objects becomes one row each.
/// Nested objects are flattened with `.`-joined keys; arrays inside a row
/// are written as `;`-separated lists.
pub fn to_csv(value: &Value) -> Result<String> {
    let rows: Vec<Vec<(String, String)>> = match value {
        Value::Array(items) => items.iter().map(flatten_row).collect(),
        other => vec![flatten_row(other)],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| k.as_str()))?;
    }
    for row in &rows {
        w.write_record(row.iter().map(|(_, v)| v.as_str()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn flatten_row(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match v {
        Value::Object(map) => flatten_into(map, "", &mut out),
        other => out.push(("value".into(), scalar_text(other))),
    }
    out
}

fn flatten_into(map: &Map<String, Value>, prefix: &str, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => flatten_into(inner, &key, out),
            other => out.push((key, scalar_text(other))),
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_object_flattens_to_one_row() {
        let v = json!({"n": 3, "bounds": {"se1": 0.5, "cv": null}, "tags": [1, 2]});
        let text = to_csv(&v).unwrap();
        assert_eq!(text, "n,bounds.se1,bounds.cv,tags\n3,0.5,,1;2\n");
    }

    #[test]
    fn array_becomes_rows() {
        let v = json!([{"r": 0.1, "t": 1.0}, {"r": 0.2, "t": 0.5}]);
        assert_eq!(to_csv(&v).unwrap(), "r,t\n0.1,1.0\n0.2,0.5\n");
    }
}
