//! LIBSVM / SVMlight text format: `label idx:val idx:val ...` with 1-based
//! feature indices.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{AimError, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub a: SparseMatrix,
    /// Labels in `{0, 1}`.
    pub labels: Vec<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> AimError {
    AimError::Parse { line, message: message.into() }
}

/// `+1`/`1` map to 1; `0` and `-1` map to 0.
fn map_label(token: &str, line: usize) -> Result<f64> {
    let raw: f64 = token.parse().map_err(|_| parse_err(line, format!("label {token:?} is not a number")))?;
    match raw {
        x if x == 1.0 => Ok(1.0),
        x if x == 0.0 || x == -1.0 => Ok(0.0),
        _ => Err(parse_err(line, format!("label {token:?} is not one of -1, 0, +1"))),
    }
}

/// Parses LIBSVM text.
///
/// The column count is the largest index seen unless `n_features` is given,
/// in which case larger indices are an error. Blank lines and `#` comments
/// are skipped; `qid:` tokens are ignored.
pub fn parse_libsvm<R: BufRead>(reader: R, n_features: Option<usize>) -> Result<LabeledData> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            if line.trim().is_empty() {
                log::warn!("libsvm: skipping blank line {lineno}");
            }
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = map_label(tokens.next().expect("content is non-empty"), lineno)?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            if tok.starts_with("qid:") {
                continue;
            }
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, found {tok:?}")))?;
            let idx: usize =
                idx.parse().map_err(|_| parse_err(lineno, format!("feature index {idx:?} is not a positive integer")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based"));
            }
            let val: f64 = val.parse().map_err(|_| parse_err(lineno, format!("value {val:?} is not a number")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("value {val} is not finite")));
            }
            if let Some(&(prev, _)) = row.last() {
                if idx - 1 <= prev {
                    return Err(parse_err(lineno, format!("feature index {idx} does not increase")));
                }
            }
            if let Some(n) = n_features {
                if idx > n {
                    return Err(parse_err(lineno, format!("feature index {idx} exceeds n_features = {n}")));
                }
            }
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(AimError::EmptyInput);
    }
    let a = SparseMatrix::from_rows(n_features.unwrap_or(max_index), rows)?;
    Ok(LabeledData { a, labels })
}

pub fn read_libsvm_file(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<LabeledData> {
    let file = File::open(path.as_ref())
        .map_err(|e| AimError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_libsvm(BufReader::new(file), n_features)
}

/// Canonical text: integer labels, 1-based indices, shortest round-trip
/// float formatting, one row per line.
pub fn serialize_libsvm(a: &SparseMatrix, labels: &[f64]) -> Result<String> {
    crate::error::check_dim(a.rows(), labels.len())?;
    let mut out = String::new();
    for (r, &label) in labels.iter().enumerate() {
        write!(out, "{}", label as i64).expect("writing to a String");
        for (c, v) in a.row(r) {
            write!(out, " {}:{}", c + 1, v).expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}
