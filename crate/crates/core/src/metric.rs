//! Rank-one metric algebra.
//!
//! An inertial direction `m` and weight `μ ∈ [0, 1)` define
//!
//! ```text
//! Π    = m mᵀ / ‖m‖²
//! M⁻¹  = I − μ Π
//! M    = I + μ/(1 − μ) Π
//! ```
//!
//! with `M⁻¹ ⪯ I ⪯ M`. Nothing here materializes a matrix; every operation is
//! a single dot product plus an axpy.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, AimError, Result};
use crate::vector::{dot, DenseVector};

/// `Π v = m (mᵀv) / ‖m‖²`
pub fn project_onto(m: &DenseVector, v: &DenseVector) -> Result<DenseVector> {
    check_dim(m.len(), v.len())?;
    let mm = m.norm_sq();
    if mm == 0.0 {
        return Err(AimError::ZeroVector);
    }
    Ok(m.scaled(dot(m, v) / mm))
}

/// The pair `(m, μ)` defining `M`, or the identity when `m` is the zero sentinel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    m: Option<DenseVector>,
    mu: f64,
    /// `1 − μ`. Stored on its own so `M` keeps full precision when a caller
    /// knows the complement more accurately than `1.0 - mu`.
    complement: f64,
}

impl MetricDescriptor {
    pub fn identity() -> Self {
        MetricDescriptor { m: None, mu: 0.0, complement: 1.0 }
    }

    /// Builds the metric for direction `m` and weight `mu`. A direction with
    /// `‖m‖ < mtol` degrades to the identity.
    pub fn new(m: DenseVector, mu: f64, mtol: f64) -> Result<Self> {
        validate_mu(mu)?;
        m.check_finite()?;
        let complement = 1.0 - mu;
        if !(m.norm() >= mtol) || m.norm_sq() == 0.0 {
            return Ok(MetricDescriptor { m: None, mu, complement });
        }
        Ok(MetricDescriptor { m: Some(m), mu, complement })
    }

    /// Like [`MetricDescriptor::new`] with an explicit `1 − μ`, which must
    /// agree with `1.0 - mu` to within `1e-8`. With `μ` near 1 the difference
    /// `1.0 - mu` keeps only a few significant digits and `M` inherits the
    /// error; a complement computed without cancellation avoids that.
    pub fn with_complement(m: DenseVector, mu: f64, complement: f64, mtol: f64) -> Result<Self> {
        let mut d = MetricDescriptor::new(m, mu, mtol)?;
        if !(complement > 0.0 && complement <= 1.0) || (complement - d.complement).abs() > 1e-8 {
            return Err(AimError::InvalidParameter {
                name: "complement",
                reason: format!("{complement} does not match 1 - mu = {}", d.complement),
            });
        }
        d.complement = complement;
        Ok(d)
    }

    /// `None` is the zero sentinel.
    pub fn direction(&self) -> Option<&DenseVector> {
        self.m.as_ref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `μ/(1 − μ)`, the weight of `Π` in `M`.
    pub fn weight(&self) -> f64 {
        self.mu / self.complement
    }

    pub fn is_identity(&self) -> bool {
        self.m.is_none() || self.mu == 0.0
    }

    /// `(mᵀv / ‖m‖²)` for the stored direction, zero for the sentinel.
    fn coefficient(&self, v: &DenseVector) -> Result<Option<(&DenseVector, f64)>> {
        match &self.m {
            None => Ok(None),
            Some(m) => {
                check_dim(m.len(), v.len())?;
                Ok(Some((m, dot(m, v) / m.norm_sq())))
            }
        }
    }

    /// `M⁻¹ v = v − μ Π v`
    pub fn apply_inverse(&self, v: &DenseVector) -> Result<DenseVector> {
        let mut out = v.clone();
        if let Some((m, c)) = self.coefficient(v)? {
            out.axpy(-self.mu * c, m)?;
        }
        Ok(out)
    }

    /// `M v = v + μ/(1−μ) Π v`
    pub fn apply(&self, v: &DenseVector) -> Result<DenseVector> {
        let mut out = v.clone();
        if let Some((m, c)) = self.coefficient(v)? {
            out.axpy(self.weight() * c, m)?;
        }
        Ok(out)
    }

    /// `vᵀ M v = ‖v‖² + μ/(1−μ) (mᵀv)² / ‖m‖²`
    pub fn norm_sq(&self, v: &DenseVector) -> Result<f64> {
        let base = v.norm_sq();
        match &self.m {
            None => Ok(base),
            Some(m) => {
                check_dim(m.len(), v.len())?;
                let mv = dot(m, v);
                Ok(base + self.weight() * mv * mv / m.norm_sq())
            }
        }
    }
}

pub(crate) fn validate_mu(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(AimError::InvalidParameter {
            name: "mu",
            reason: format!("{mu} is outside [0, 1)"),
        })
    }
}

pub fn apply_metric_inverse(d: &MetricDescriptor, v: &DenseVector) -> Result<DenseVector> {
    d.apply_inverse(v)
}

pub fn apply_metric(d: &MetricDescriptor, v: &DenseVector) -> Result<DenseVector> {
    d.apply(v)
}

pub fn mnorm_sq(d: &MetricDescriptor, v: &DenseVector) -> Result<f64> {
    d.norm_sq(v)
}
