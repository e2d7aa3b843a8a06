//! Small dense symmetric matrices for Hessians in verification and test problems.

use crate::error::{check_dim, AimError, Result};
use crate::vector::{dot, DenseVector};

/// A dense symmetric `n x n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetricMatrix {
    /// Validates symmetry to `1e-12` relative to the largest entry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(AimError::NonFinite { index: i });
        }
        let scale = data.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(AimError::InvalidParameter {
                        name: "matrix",
                        reason: format!("not symmetric at ({i}, {j})"),
                    });
                }
            }
        }
        Ok(DenseSymmetricMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        DenseSymmetricMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        DenseSymmetricMatrix { n, data }
    }

    /// `h hᵀ`
    pub fn outer(h: &[f64]) -> Self {
        let n = h.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = h[i] * h[j];
            }
        }
        DenseSymmetricMatrix { n, data }
    }

    /// `Bᵀ B + shift I`, symmetric positive (semi)definite by construction.
    pub fn gram(b: &[f64], n: usize, shift: f64) -> Result<Self> {
        if n == 0 || b.len() % n != 0 {
            return Err(AimError::DimensionMismatch { expected: n, got: b.len() });
        }
        let rows = b.len() / n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..rows).map(|k| b[k * n + i] * b[k * n + j]).sum();
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
            data[i * n + i] += shift;
        }
        Ok(DenseSymmetricMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<DenseVector> {
        check_dim(self.n, v.len())?;
        Ok((0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect::<Vec<_>>()
            .into())
    }

    /// `self + shift I`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += shift;
        }
        out
    }

    /// Lower Cholesky factor, or [`AimError::Singular`] when the matrix is not
    /// numerically positive definite.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.data[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(AimError::Singular);
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(l)
    }

    /// Solves `self * x = b` for positive definite `self`.
    pub fn solve_spd(&self, b: &[f64]) -> Result<DenseVector> {
        check_dim(self.n, b.len())?;
        let n = self.n;
        let l = self.cholesky()?;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
            y[i] = (b[i] - s) / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * x[k]).sum();
            x[i] = (y[i] - s) / l[i * n + i];
        }
        Ok(x.into())
    }

    fn mul_dense(&self, other: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other[k * n + j];
                }
            }
        }
        out
    }

    /// Coefficients `a_0, ..., a_{n-1}` of the monic characteristic polynomial
    /// `p(t) = a_0 + a_1 t + ... + a_{n-1} t^{n-1} + t^n`, by the
    /// Faddeev–LeVerrier recurrence.
    pub fn char_poly(&self) -> Vec<f64> {
        let n = self.n;
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        // M_0 = 0; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k
        let mut m = vec![0.0; n * n];
        for k in 1..=n {
            let mut next = self.mul_dense(&m);
            for i in 0..n {
                next[i * n + i] += coeffs[n - k + 1];
            }
            let am = self.mul_dense(&next);
            let tr: f64 = (0..n).map(|i| am[i * n + i]).sum();
            coeffs[n - k] = -tr / k as f64;
            m = next;
        }
        coeffs.truncate(n);
        coeffs
    }
}
