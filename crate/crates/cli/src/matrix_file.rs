use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use logminor::io::{parse_matrix_text, write_matrix_text};
use logminor::{make_spd, SpdMatrix64, SquareMatrix64};
use serde_json::Value;

/// Reads a matrix in the plain text format (`n` then rows, or `SPECTRUM`
/// then eigenvalues), as JSON (`[[..]]` or `{"matrix": [[..]]}`), or as CSV
/// rows of numbers.
pub fn load_matrix(path: &Path) -> Result<SpdMatrix64> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let entries = parse_any(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(make_spd(entries)?)
}

pub fn parse_any(text: &str) -> Result<SquareMatrix64> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return parse_json(trimmed);
    }
    let first_data_line = trimmed
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if first_data_line.contains(',') {
        return parse_csv(trimmed);
    }
    Ok(parse_matrix_text(text)?)
}

fn parse_json(text: &str) -> Result<SquareMatrix64> {
    let v: Value = serde_json::from_str(text)?;
    let rows = match &v {
        Value::Object(map) => map
            .get("matrix")
            .context("JSON object has no `matrix` field")?,
        other => other,
    };
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(rows.clone()).context("`matrix` must be an array of rows")?;
    Ok(SquareMatrix64::from_rows(rows)?)
}

fn parse_csv(text: &str) -> Result<SquareMatrix64> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .with_context(|| format!("not a number: `{s}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("empty CSV matrix");
    }
    Ok(SquareMatrix64::from_rows(rows)?)
}

pub fn matrix_csv(m: &SquareMatrix64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in m.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn matrix_text(m: &SquareMatrix64) -> String {
    write_matrix_text(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_formats_agree() {
        let text = "2\n2 0.5\n0.5 1\n";
        let json = r#"{"matrix": [[2, 0.5], [0.5, 1]]}"#;
        let csv = "2,0.5\n0.5,1\n";
        let a = parse_any(text).unwrap();
        assert_eq!(a, parse_any(json).unwrap());
        assert_eq!(a, parse_any(csv).unwrap());
        assert_eq!(a, parse_any("[[2, 0.5], [0.5, 1]]").unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let m = SquareMatrix64::from_rows(vec![vec![1.25, 0.1], vec![0.1, 3.0]]).unwrap();
        assert_eq!(parse_any(&matrix_csv(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn spectrum_format_is_accepted() {
        let m = parse_any("SPECTRUM\n3 1 2\n").unwrap();
        assert!(m.is_diagonal());
    }

    #[test]
    fn ragged_csv_is_rejected() {
        assert!(parse_any("1,2\n3\n").is_err());
    }
}
