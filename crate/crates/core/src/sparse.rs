//! Compressed-row sparse matrices.

use crate::error::{check_dim, AimError, Result};
use crate::vector::DenseVector;

/// A real matrix in compressed sparse row layout.
///
/// Column indices inside each row are strictly increasing, so `(row, col)`
/// pairs are unique. Explicitly stored zeros are kept as given.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triples in any order.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(AimError::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(AimError::InvalidMatrix(format!("non-finite value at ({r}, {c})")));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(AimError::InvalidMatrix(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &sorted {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx: sorted.iter().map(|t| t.1).collect(),
            values: sorted.iter().map(|t| t.2).collect(),
        })
    }

    /// Builds a matrix row by row; each row lists `(col, value)` with strictly
    /// increasing columns.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let mut last: Option<usize> = None;
            for &(c, v) in row {
                if c >= cols {
                    return Err(AimError::InvalidMatrix(format!(
                        "column {c} out of range in row {r} (cols = {cols})"
                    )));
                }
                if last.is_some_and(|l| c <= l) {
                    return Err(AimError::InvalidMatrix(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
                if !v.is_finite() {
                    return Err(AimError::InvalidMatrix(format!("non-finite value at ({r}, {c})")));
                }
                last = Some(c);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            rows: rows.len(),
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        let rows_vec = (0..rows)
            .map(|r| {
                (0..cols)
                    .filter_map(|c| {
                        let v = data[r * cols + c];
                        (v != 0.0).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(cols, rows_vec)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim(self.cols, x.len())?;
        let out = (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect::<Vec<f64>>();
        Ok(out.into())
    }

    /// `Aᵀ y`
    pub fn t_matvec(&self, y: &[f64]) -> Result<DenseVector> {
        check_dim(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                out[c] += v * yr;
            }
        }
        Ok(out.into())
    }

    /// Upper estimate of the squared spectral norm `‖A‖₂²` by power
    /// iteration on `AᵀA`, inflated by 1% to stay on the safe side.
    pub fn spectral_norm_sq_estimate(&self, iters: usize) -> f64 {
        if self.nnz() == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut v = DenseVector::filled(self.cols, 1.0 / (self.cols as f64).sqrt());
        let mut est = 0.0;
        for _ in 0..iters.max(1) {
            let av = self.matvec(&v).expect("dimensions fixed");
            let w = self.t_matvec(&av).expect("dimensions fixed");
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            est = n;
            v = w.scaled(1.0 / n);
        }
        est * 1.01
    }
}
