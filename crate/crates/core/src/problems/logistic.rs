use crate::error::{check_dim, AimError, Result};
use crate::oracle::ObjectiveOracle;
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

/// `ln(1 + eᶻ)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// L2-regularized logistic loss
///
/// ```text
/// f(x) = (1/n) Σ [ln(1 + exp(aᵢᵀx)) − bᵢ aᵢᵀx] + (λ/2)‖x‖²
/// ```
///
/// with labels `bᵢ ∈ {0, 1}` and rows `aᵢ` of `A`.
#[derive(Debug, Clone)]
pub struct LogisticL2Problem {
    a: SparseMatrix,
    labels: Vec<f64>,
    lambda: f64,
    lipschitz: f64,
}

impl LogisticL2Problem {
    pub fn new(a: SparseMatrix, labels: Vec<f64>, lambda: f64) -> Result<Self> {
        check_dim(a.rows(), labels.len())?;
        if a.rows() == 0 {
            return Err(AimError::EmptyInput);
        }
        if let Some(i) = labels.iter().position(|&b| b != 0.0 && b != 1.0) {
            return Err(AimError::InvalidParameter {
                name: "labels",
                reason: format!("label {} at row {i} is not 0 or 1", labels[i]),
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(AimError::InvalidParameter { name: "lambda", reason: "must be finite and >= 0".into() });
        }
        let lipschitz = a.spectral_norm_sq_estimate(50) / (4.0 * a.rows() as f64) + lambda;
        Ok(LogisticL2Problem { a, labels, lambda, lipschitz })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl ObjectiveOracle for LogisticL2Problem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        let z = self.a.matvec(x)?;
        let inv_n = 1.0 / self.a.rows() as f64;
        let mut loss = 0.0;
        let mut resid = Vec::with_capacity(z.len());
        for (&zi, &bi) in z.iter().zip(&self.labels) {
            loss += softplus(zi) - bi * zi;
            resid.push((sigmoid(zi) - bi) * inv_n);
        }
        let mut g = self.a.t_matvec(&resid)?;
        g.axpy(self.lambda, x)?;
        Ok((loss * inv_n + 0.5 * self.lambda * x.norm_sq(), g))
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_scalar_functions() {
        assert_eq!(softplus(0.0), std::f64::consts::LN_2);
        assert!((softplus(700.0) - 700.0).abs() < 1e-12);
        assert!(softplus(-700.0) >= 0.0 && softplus(-700.0) < 1e-300);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) == 1.0);
    }

    #[test]
    fn value_at_origin_is_ln2() {
        let a = SparseMatrix::from_dense(2, 2, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let p = LogisticL2Problem::new(a, vec![1.0, 0.0], 0.7).unwrap();
        let (f, g) = p.value_grad(&DenseVector::zeros(2)).unwrap();
        assert!((f - std::f64::consts::LN_2).abs() < 1e-15);
        // (1/n) Aᵀ(0.5 − b)
        let want = [0.5 * (1.0 * -0.5 + 0.5 * 0.5), 0.5 * (-2.0 * -0.5 + 3.0 * 0.5)];
        assert!((g[0] - want[0]).abs() < 1e-15 && (g[1] - want[1]).abs() < 1e-15);
    }

    #[test]
    fn single_sample_value() {
        let a = SparseMatrix::from_dense(1, 1, &[1.0]).unwrap();
        let p = LogisticL2Problem::new(a, vec![1.0], 0.1).unwrap();
        let f = p.value(&DenseVector::from(vec![10.0])).unwrap();
        assert!((f - ((-10f64).exp().ln_1p() + 0.1 * 50.0)).abs() < 1e-15);
        assert!((f - 5.0 - 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_labels_and_lambda() {
        let a = SparseMatrix::from_dense(1, 1, &[1.0]).unwrap();
        assert!(LogisticL2Problem::new(a.clone(), vec![-1.0], 0.1).is_err());
        assert!(LogisticL2Problem::new(a.clone(), vec![1.0], -0.1).is_err());
        assert!(LogisticL2Problem::new(a, vec![1.0, 0.0], 0.1).is_err());
    }
}
