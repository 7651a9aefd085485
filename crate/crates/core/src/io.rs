//! Plain-text matrix files.
//!
//! Dense form: first line `n`, then `n` lines of `n` whitespace-separated reals.
//! Spectrum form: the token `SPECTRUM`, then the eigenvalues (any whitespace),
//! which yields a diagonal matrix.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

fn parse_real<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| Error::Parse(format!("line {line}: `{tok}` is not a real number")))
}

/// Parses either file form into a square matrix (not yet validated as SPD).
pub fn parse_matrix_text<T: Scalar>(text: &str) -> Result<SquareMatrix<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;

    let mut head = first.split_whitespace();
    if head.next() == Some("SPECTRUM") {
        let mut values = Vec::new();
        for tok in head {
            values.push(parse_real::<T>(tok, first_no)?);
        }
        for (no, line) in lines {
            for tok in line.split_whitespace() {
                values.push(parse_real::<T>(tok, no)?);
            }
        }
        if values.is_empty() {
            return Err(Error::Parse("SPECTRUM header without eigenvalues".into()));
        }
        return Ok(SquareMatrix::from_diagonal(&values));
    }

    let n: usize = first.parse().map_err(|_| {
        Error::Parse(format!(
            "line {first_no}: expected dimension, got `{first}`"
        ))
    })?;
    let mut rows = Vec::with_capacity(n);
    for (no, line) in lines {
        let row = line
            .split_whitespace()
            .map(|tok| parse_real::<T>(tok, no))
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse(format!(
            "header says {n} rows, found {}",
            rows.len()
        )));
    }
    SquareMatrix::from_rows(rows)
}

/// Dense-form text; values use shortest round-trip formatting.
pub fn write_matrix_text<T: Scalar>(m: &SquareMatrix<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
