//! The objective interface shared by every solver, plus two small oracles.

use crate::dense::DenseSymmetricMatrix;
use crate::error::{check_dim, Result};
use crate::vector::{dot, DenseVector};

/// Value and gradient evaluation for a smooth objective `f: Rⁿ → R`.
///
/// Implementations are immutable; solvers share them read-only, so the trait
/// requires `Send + Sync`.
pub trait ObjectiveOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)>;

    fn value(&self, x: &DenseVector) -> Result<f64> {
        Ok(self.value_grad(x)?.0)
    }

    fn gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        Ok(self.value_grad(x)?.1)
    }

    /// Exact Hessian-vector product, when the oracle can provide one.
    fn hessian_vector(&self, _x: &DenseVector, _v: &DenseVector) -> Option<Result<DenseVector>> {
        None
    }

    /// Upper bound `D` on the gradient's Lipschitz constant, if known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// `f(x) = ½ xᵀ H x − bᵀ x` with symmetric `H`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    h: DenseSymmetricMatrix,
    b: DenseVector,
    lipschitz: Option<f64>,
}

impl QuadraticObjective {
    pub fn new(h: DenseSymmetricMatrix, b: DenseVector) -> Result<Self> {
        check_dim(h.dim(), b.len())?;
        Ok(QuadraticObjective { h, b, lipschitz: None })
    }

    /// Attaches a known bound on `λ_max(H)`.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn hessian(&self) -> &DenseSymmetricMatrix {
        &self.h
    }

    pub fn linear_term(&self) -> &DenseVector {
        &self.b
    }

    /// `x* = H⁻¹ b`; requires `H` positive definite.
    pub fn minimizer(&self) -> Result<DenseVector> {
        self.h.solve_spd(&self.b)
    }

    /// `f(x*) = −½ bᵀ x*`
    pub fn min_value(&self) -> Result<f64> {
        let xs = self.minimizer()?;
        Ok(-0.5 * dot(&self.b, &xs))
    }
}

impl ObjectiveOracle for QuadraticObjective {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        let hx = self.h.matvec(x)?;
        let f = 0.5 * dot(x, &hx) - dot(&self.b, x);
        let g = hx.sub(&self.b)?;
        Ok((f, g))
    }

    fn hessian_vector(&self, _x: &DenseVector, v: &DenseVector) -> Option<Result<DenseVector>> {
        Some(self.h.matvec(v))
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Adapts a closure returning `(f, ∇f)` into an oracle.
pub struct FnObjective<F> {
    dim: usize,
    func: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&DenseVector) -> Result<(f64, DenseVector)> + Send + Sync,
{
    pub fn new(dim: usize, func: F) -> Self {
        FnObjective { dim, func }
    }
}

impl<F> ObjectiveOracle for FnObjective<F>
where
    F: Fn(&DenseVector) -> Result<(f64, DenseVector)> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        check_dim(self.dim, x.len())?;
        let (f, g) = (self.func)(x)?;
        check_dim(self.dim, g.len())?;
        Ok((f, g))
    }
}
