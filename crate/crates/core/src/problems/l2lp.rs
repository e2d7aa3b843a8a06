use crate::error::{check_dim, AimError, Result};
use crate::oracle::ObjectiveOracle;
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// C¹ surrogate for `|z|`: quadratic `z²/(2ε) + ε/2` on `|z| ≤ ε`.
pub fn smooth_abs(z: f64, eps: f64) -> f64 {
    if z.abs() > eps {
        z.abs()
    } else {
        z * z / (2.0 * eps) + eps / 2.0
    }
}

pub fn smooth_abs_derivative(z: f64, eps: f64) -> f64 {
    if z.abs() > eps {
        z.signum()
    } else {
        z / eps
    }
}

/// `f(x) = ½‖Ax − b‖² + λ Σ s(xᵢ, ε)^p`
///
/// For `p = 2` the penalty is the exact `λ‖x‖²`.
#[derive(Debug, Clone)]
pub struct L2LpProblem {
    a: SparseMatrix,
    b: DenseVector,
    lambda: f64,
    p: f64,
    eps: f64,
    lipschitz: f64,
}

impl L2LpProblem {
    pub fn new(a: SparseMatrix, b: DenseVector, lambda: f64, p: f64, eps: f64) -> Result<Self> {
        check_dim(a.rows(), b.len())?;
        b.check_finite()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AimError::InvalidParameter { name: "lambda", reason: "must be finite and > 0".into() });
        }
        if !(p > 0.0 && p <= 2.0) {
            return Err(AimError::InvalidParameter { name: "p", reason: format!("{p} is outside (0, 2]") });
        }
        if !(eps > 0.0) {
            return Err(AimError::InvalidParameter { name: "eps_smooth", reason: "must be > 0".into() });
        }
        // bound on the penalty's second derivative
        let curvature = if p == 2.0 {
            2.0
        } else {
            let inner = p * (eps / 2.0).powf(p - 1.0) / eps;
            let outer = p * (1.0 - p).abs() * eps.powf(p - 2.0);
            inner.max(outer).max(p / eps)
        };
        let lipschitz = a.spectral_norm_sq_estimate(50) + lambda * curvature;
        Ok(L2LpProblem { a, b, lambda, p, eps, lipschitz })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &DenseVector {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps_smooth(&self) -> f64 {
        self.eps
    }
}

impl ObjectiveOracle for L2LpProblem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        let mut resid = self.a.matvec(x)?;
        resid.axpy(-1.0, &self.b)?;
        let mut g = self.a.t_matvec(&resid)?;
        let mut penalty = 0.0;
        if self.p == 2.0 {
            penalty = x.norm_sq();
            g.axpy(2.0 * self.lambda, x)?;
        } else {
            for (gi, &xi) in g.iter_mut().zip(x.iter()) {
                let s = smooth_abs(xi, self.eps);
                let sp = s.powf(self.p);
                penalty += sp;
                *gi += self.lambda * self.p * sp / s * smooth_abs_derivative(xi, self.eps);
            }
        }
        Ok((0.5 * resid.norm_sq() + self.lambda * penalty, g))
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_abs_examples() {
        assert_eq!(smooth_abs(1.0, 0.1), 1.0);
        assert_eq!(smooth_abs(0.0, 0.1), 0.05);
        assert!((smooth_abs(0.1, 0.1) - 0.1).abs() < 1e-15);
        assert!((smooth_abs_derivative(0.1, 0.1) - 1.0).abs() < 1e-15);
        assert_eq!(smooth_abs_derivative(-3.0, 0.1), -1.0);
    }

    fn small() -> (SparseMatrix, DenseVector) {
        (SparseMatrix::from_dense(2, 3, &[1.0, 0.0, 2.0, -1.0, 3.0, 0.0]).unwrap(), DenseVector::from(vec![1.0, -2.0]))
    }

    #[test]
    fn ridge_at_origin() {
        let (a, b) = small();
        let p = L2LpProblem::new(a.clone(), b.clone(), 0.4, 2.0, 0.1).unwrap();
        let (f, g) = p.value_grad(&DenseVector::zeros(3)).unwrap();
        assert_eq!(f, 2.5);
        assert_eq!(g, a.t_matvec(&b).unwrap().scaled(-1.0));
    }

    #[test]
    fn l1_at_origin_adds_constant_penalty() {
        let (a, b) = small();
        let p = L2LpProblem::new(a.clone(), b.clone(), 0.4, 1.0, 0.1).unwrap();
        let (f, g) = p.value_grad(&DenseVector::zeros(3)).unwrap();
        assert!((f - (2.5 + 0.4 * 3.0 * 0.05)).abs() < 1e-15);
        assert_eq!(g, a.t_matvec(&b).unwrap().scaled(-1.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let (a, b) = small();
        assert!(L2LpProblem::new(a.clone(), b.clone(), 0.0, 1.0, 0.1).is_err());
        assert!(L2LpProblem::new(a.clone(), b.clone(), 0.1, 2.5, 0.1).is_err());
        assert!(L2LpProblem::new(a.clone(), b.clone(), 0.1, 0.0, 0.1).is_err());
        assert!(L2LpProblem::new(a, b, 0.1, 1.0, 0.0).is_err());
    }
}
