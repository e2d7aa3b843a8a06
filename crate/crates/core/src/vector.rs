//! Dense real vectors used for iterates, gradients and inertial terms.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, AimError, Result};

/// An owned dense vector of `f64`.
///
/// Construct through [`DenseVector::new`] when the entries come from outside
/// (it rejects NaN and infinities). Arithmetic inside the crate produces
/// vectors through `From<Vec<f64>>`, and solvers re-validate with
/// [`DenseVector::check_finite`] before admitting a new iterate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let v = DenseVector(entries);
        v.check_finite()?;
        Ok(v)
    }

    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        DenseVector(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(AimError::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| a * v).collect())
    }

    /// `self - other`
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        check_dim(self.len(), other.len())?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `self + other`
    pub fn add(&self, other: &DenseVector) -> Result<DenseVector> {
        check_dim(self.len(), other.len())?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// In place `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &DenseVector) -> Result<()> {
        check_dim(self.len(), x.len())?;
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
        Ok(())
    }

    /// Unit vector in the direction of `self`, or `None` when `‖self‖ < tol`.
    pub fn normalized(&self, tol: f64) -> Option<DenseVector> {
        let n = self.norm();
        if !(n >= tol) || n == 0.0 {
            return None;
        }
        Some(self.scaled(1.0 / n))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(v: &[f64]) -> Self {
        DenseVector(v.to_vec())
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            DenseVector::new(vec![1.0, f64::NAN]),
            Err(AimError::NonFinite { index: 1 })
        );
        assert!(DenseVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn normalized_respects_tolerance() {
        let v = DenseVector::from(vec![3.0, 4.0]);
        let u = v.normalized(1e-8).unwrap();
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
        assert!(DenseVector::from(vec![1e-9, 0.0]).normalized(1e-8).is_none());
        assert!(DenseVector::zeros(3).normalized(0.0).is_none());
    }

    #[test]
    fn dimension_checks() {
        let a = DenseVector::zeros(2);
        let b = DenseVector::zeros(3);
        assert!(a.dot(&b).is_err());
        assert!(a.sub(&b).is_err());
    }
}
