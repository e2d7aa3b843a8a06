//! Inertial-term constructions.
//!
//! Each strategy turns the current iterate, gradient and (optionally) the
//! previous iterate/gradient into a direction `m` and weight `μ`. Velocity,
//! acceleration and Hessian-gradient directions are normalized to unit length
//! and use the run's fixed `μ`; the quasi-Newton direction stays unnormalized
//! and carries its own `μ`, fixed by the secant equation `M s = α y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, AimError, Result};
use crate::metric::MetricDescriptor;
use crate::oracle::ObjectiveOracle;
use crate::vector::{dot, DenseVector};

pub const DEFAULT_MTOL: f64 = 1e-8;
pub const DEFAULT_FD_EPS: f64 = 1e-3;
pub const DEFAULT_ALPHA_SAFEGUARD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InertiaKind {
    Velocity,
    Acceleration,
    QuasiNewton,
    HessianGradient,
}

impl InertiaKind {
    pub const ALL: [InertiaKind; 4] = [
        InertiaKind::Velocity,
        InertiaKind::Acceleration,
        InertiaKind::QuasiNewton,
        InertiaKind::HessianGradient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InertiaKind::Velocity => "velocity",
            InertiaKind::Acceleration => "acceleration",
            InertiaKind::QuasiNewton => "quasi_newton",
            InertiaKind::HessianGradient => "hessian_gradient",
        }
    }

    /// Extra gradient evaluations the strategy spends per outer iteration.
    pub fn extra_grad_evals(self) -> usize {
        match self {
            InertiaKind::HessianGradient => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for InertiaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InertiaKind {
    type Err = AimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "velocity" | "v" => Ok(InertiaKind::Velocity),
            "acceleration" | "a" => Ok(InertiaKind::Acceleration),
            "quasi_newton" | "qn" => Ok(InertiaKind::QuasiNewton),
            "hessian_gradient" | "hg" => Ok(InertiaKind::HessianGradient),
            other => Err(AimError::InvalidParameter {
                name: "inertia",
                reason: format!("unknown strategy `{other}`"),
            }),
        }
    }
}

/// Previous iterate and gradient; absent at `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub x_prev: DenseVector,
    pub g_prev: DenseVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaStrategy {
    pub kind: InertiaKind,
    /// Finite-difference step for the Hessian-gradient product.
    #[serde(default = "default_fd_eps")]
    pub eps_fd: f64,
    /// Multiplier `c > 1` on the lower bound for `α` (quasi-Newton only).
    #[serde(default = "default_alpha_safeguard")]
    pub alpha_safeguard: f64,
    /// Directions shorter than this become the zero sentinel.
    #[serde(default = "default_mtol")]
    pub mtol: f64,
}

fn default_fd_eps() -> f64 {
    DEFAULT_FD_EPS
}
fn default_alpha_safeguard() -> f64 {
    DEFAULT_ALPHA_SAFEGUARD
}
fn default_mtol() -> f64 {
    DEFAULT_MTOL
}

/// Output of a strategy for one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaOutput {
    /// `None` is the zero sentinel.
    pub m: Option<DenseVector>,
    /// Strategy-determined weight; `None` means use the run's fixed `μ`.
    pub mu: Option<f64>,
    /// `1 − μ` computed without cancellation, when the strategy has it.
    pub mu_complement: Option<f64>,
    pub extra_grad_evals: usize,
    /// Set when the quasi-Newton curvature condition failed and the strategy
    /// fell back to the zero sentinel.
    pub fell_back: bool,
}

impl InertiaOutput {
    fn sentinel(extra_grad_evals: usize) -> Self {
        InertiaOutput { m: None, mu: None, mu_complement: None, extra_grad_evals, fell_back: false }
    }
}

impl InertiaStrategy {
    pub fn new(kind: InertiaKind) -> Self {
        InertiaStrategy {
            kind,
            eps_fd: DEFAULT_FD_EPS,
            alpha_safeguard: DEFAULT_ALPHA_SAFEGUARD,
            mtol: DEFAULT_MTOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_fd > 0.0) {
            return Err(AimError::InvalidParameter { name: "eps_fd", reason: "must be > 0".into() });
        }
        if !(self.alpha_safeguard > 1.0) {
            return Err(AimError::InvalidParameter {
                name: "alpha_safeguard",
                reason: "must be > 1".into(),
            });
        }
        if !(self.mtol >= 0.0) {
            return Err(AimError::InvalidParameter { name: "mtol", reason: "must be >= 0".into() });
        }
        Ok(())
    }

    /// Produces `(m, μ)` for the current iterate. Strategies that need history
    /// return the zero sentinel at `k = 0`. A quasi-Newton curvature violation
    /// also yields the sentinel (pure gradient step for that iteration).
    pub fn produce(
        &self,
        oracle: &dyn ObjectiveOracle,
        x: &DenseVector,
        g: &DenseVector,
        history: Option<&History>,
    ) -> Result<InertiaOutput> {
        match self.kind {
            InertiaKind::Velocity => Ok(match history {
                Some(h) => InertiaOutput {
                    m: inertia_velocity(x, &h.x_prev, self.mtol)?,
                    ..InertiaOutput::sentinel(0)
                },
                None => InertiaOutput::sentinel(0),
            }),
            InertiaKind::Acceleration => Ok(match history {
                Some(h) => InertiaOutput {
                    m: inertia_acceleration(g, &h.g_prev, self.mtol)?,
                    ..InertiaOutput::sentinel(0)
                },
                None => InertiaOutput::sentinel(0),
            }),
            InertiaKind::HessianGradient => Ok(InertiaOutput {
                m: inertia_hessian_gradient(oracle, x, g, self.eps_fd, self.mtol)?,
                ..InertiaOutput::sentinel(1)
            }),
            InertiaKind::QuasiNewton => {
                let Some(h) = history else {
                    return Ok(InertiaOutput::sentinel(0));
                };
                let s = x.sub(&h.x_prev)?;
                let y = g.sub(&h.g_prev)?;
                let attempt = select_alpha(&s, &y, self.alpha_safeguard).and_then(|alpha| {
                    let (m, mu) = inertia_quasi_newton(&s, &y, alpha)?;
                    let complement = quasi_newton_complement(&m, &s, &y, alpha)?;
                    Ok((m, mu, complement))
                });
                match attempt {
                    Ok((m, mu, complement)) if m.norm() >= self.mtol => Ok(InertiaOutput {
                        m: Some(m),
                        mu: Some(mu),
                        mu_complement: Some(complement),
                        extra_grad_evals: 0,
                        fell_back: false,
                    }),
                    Ok(_) => Ok(InertiaOutput::sentinel(0)),
                    Err(AimError::CurvatureViolation { .. }) | Err(AimError::DegenerateSecant(_)) => {
                        Ok(InertiaOutput { fell_back: true, ..InertiaOutput::sentinel(0) })
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// Unit velocity `x_k − x_prev`, or `None` below `mtol`.
pub fn inertia_velocity(x_k: &DenseVector, x_prev: &DenseVector, mtol: f64) -> Result<Option<DenseVector>> {
    Ok(x_k.sub(x_prev)?.normalized(mtol))
}

/// Unit acceleration `g_k − g_prev`, or `None` below `mtol`.
pub fn inertia_acceleration(g_k: &DenseVector, g_prev: &DenseVector, mtol: f64) -> Result<Option<DenseVector>> {
    Ok(g_k.sub(g_prev)?.normalized(mtol))
}

/// `α = c ‖s‖² / (sᵀy)`, strictly above the curvature lower bound for `c > 1`.
pub fn select_alpha(s: &DenseVector, y: &DenseVector, c: f64) -> Result<f64> {
    check_dim(s.len(), y.len())?;
    if !(c > 1.0) {
        return Err(AimError::InvalidParameter { name: "c", reason: format!("{c} must exceed 1") });
    }
    let sty = dot(s, y);
    if !(sty > 0.0) {
        return Err(AimError::CurvatureViolation { sty });
    }
    Ok(c * s.norm_sq() / sty)
}

/// Quasi-Newton direction `m = α y − s` with `μ = ‖m‖² / (α mᵀy)`.
///
/// The induced metric satisfies the secant equation `M s = α y`.
pub fn inertia_quasi_newton(s: &DenseVector, y: &DenseVector, alpha: f64) -> Result<(DenseVector, f64)> {
    check_dim(s.len(), y.len())?;
    let mut m = y.scaled(alpha);
    m.axpy(-1.0, s)?;
    let mm = m.norm_sq();
    if mm == 0.0 {
        return Err(AimError::DegenerateSecant("alpha * y - s is zero".into()));
    }
    let my = dot(&m, y);
    if !(my > 0.0) {
        return Err(AimError::DegenerateSecant(format!("m'y = {my} is not positive")));
    }
    let mu = mm / (alpha * my);
    if !(mu > 0.0 && mu < 1.0) {
        return Err(AimError::DegenerateSecant(format!("mu = {mu} is outside (0, 1)")));
    }
    Ok((m, mu))
}

/// `1 − μ = mᵀs / (α mᵀy)` for `m = α y − s`, without the cancellation of
/// `1.0 - mu` when `μ` is close to 1.
pub fn quasi_newton_complement(m: &DenseVector, s: &DenseVector, y: &DenseVector, alpha: f64) -> Result<f64> {
    check_dim(m.len(), s.len())?;
    check_dim(s.len(), y.len())?;
    let ms = dot(m, s);
    let my = dot(m, y);
    let c = ms / (alpha * my);
    if !(c > 0.0 && c < 1.0) {
        return Err(AimError::DegenerateSecant(format!("1 - mu = {c} is outside (0, 1)")));
    }
    Ok(c)
}

/// The quasi-Newton metric for `(s, y, α)`, carrying the accurate `1 − μ`.
pub fn quasi_newton_metric(s: &DenseVector, y: &DenseVector, alpha: f64, mtol: f64) -> Result<MetricDescriptor> {
    let (m, mu) = inertia_quasi_newton(s, y, alpha)?;
    let complement = quasi_newton_complement(&m, s, y, alpha)?;
    MetricDescriptor::with_complement(m, mu, complement, mtol)
}

/// Unit finite-difference Hessian-gradient product
/// `(g − ∇f(x − ε g)) / ε`; costs one gradient evaluation.
pub fn inertia_hessian_gradient(
    oracle: &dyn ObjectiveOracle,
    x: &DenseVector,
    g: &DenseVector,
    eps: f64,
    mtol: f64,
) -> Result<Option<DenseVector>> {
    if !(eps > 0.0) {
        return Err(AimError::InvalidParameter { name: "eps", reason: "must be > 0".into() });
    }
    check_dim(x.len(), g.len())?;
    let mut probe = x.clone();
    probe.axpy(-eps, g)?;
    let g_probe = oracle.gradient(&probe)?;
    let mut hg = g.sub(&g_probe)?;
    for v in hg.iter_mut() {
        *v /= eps;
    }
    Ok(hg.normalized(mtol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseSymmetricMatrix;
    use crate::oracle::QuadraticObjective;

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::from(x.to_vec())
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(inertia_velocity(&v(&[1.0, 2.0]), &v(&[1.0, 2.0]), DEFAULT_MTOL).unwrap(), None);
        assert_eq!(
            inertia_velocity(&v(&[2.0, 0.0]), &v(&[0.0, 0.0]), DEFAULT_MTOL).unwrap().unwrap().as_slice(),
            &[1.0, 0.0]
        );
        let m = inertia_velocity(&v(&[1.0, 1.0]), &v(&[0.0, 0.0]), DEFAULT_MTOL).unwrap().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[0] - h).abs() < 1e-15 && (m[1] - h).abs() < 1e-15);
        assert!(inertia_velocity(&v(&[1.0]), &v(&[1.0, 2.0]), DEFAULT_MTOL).is_err());
    }

    #[test]
    fn acceleration_examples() {
        assert_eq!(inertia_acceleration(&v(&[1.0, 3.0]), &v(&[1.0, 3.0]), DEFAULT_MTOL).unwrap(), None);
        assert_eq!(
            inertia_acceleration(&v(&[3.0, 0.0]), &v(&[1.0, 0.0]), DEFAULT_MTOL).unwrap().unwrap().as_slice(),
            &[1.0, 0.0]
        );
        assert_eq!(
            inertia_acceleration(&v(&[0.0, 0.0]), &v(&[0.0, 1.0]), DEFAULT_MTOL).unwrap().unwrap().as_slice(),
            &[0.0, -1.0]
        );
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(select_alpha(&v(&[1.0, 0.0]), &v(&[2.0, 0.0]), 2.0).unwrap(), 1.0);
        assert_eq!(select_alpha(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1.5).unwrap(), 1.5);
        assert!(matches!(
            select_alpha(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0]), 2.0),
            Err(AimError::CurvatureViolation { .. })
        ));
        assert!(select_alpha(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn quasi_newton_examples() {
        let (m, mu) = inertia_quasi_newton(&v(&[1.0, 0.0]), &v(&[2.0, 0.0]), 1.0).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 0.0]);
        assert_eq!(mu, 0.5);
        let d = MetricDescriptor::new(m, mu, DEFAULT_MTOL).unwrap();
        assert_eq!(d.apply(&v(&[1.0, 0.0])).unwrap().as_slice(), &[2.0, 0.0]);

        let (m, mu) = inertia_quasi_newton(&v(&[1.0, 0.0]), &v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 2.0]);
        assert!((mu - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn quasi_newton_metric_keeps_precision_near_unit_weight() {
        // sᵀy = 1e-3 with α = 2000 puts 1 − μ near 2.5e-7
        let (s, y) = (v(&[1.0, 0.0]), v(&[1e-3, 1.0]));
        let alpha = select_alpha(&s, &y, 2.0).unwrap();
        let d = quasi_newton_metric(&s, &y, alpha, DEFAULT_MTOL).unwrap();
        assert!(1.0 - d.mu() < 1e-6);
        let ms = d.apply(&s).unwrap();
        let target = y.scaled(alpha);
        assert!(ms.sub(&target).unwrap().norm() <= 1e-14 * target.norm());
    }

    #[test]
    fn quasi_newton_rejects_alpha_at_bound() {
        // bound is ‖s‖²/(sᵀy) = 1: μ → 1 and the pair is rejected
        let s = v(&[1.0, 0.0]);
        let y = v(&[1.0, 1.0]);
        assert!(matches!(inertia_quasi_newton(&s, &y, 1.0), Err(AimError::DegenerateSecant(_))));
        assert!(matches!(inertia_quasi_newton(&s, &v(&[1.0, 0.0]), 1.0), Err(AimError::DegenerateSecant(_))));
    }

    #[test]
    fn hessian_gradient_examples() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::from_diagonal(&[2.0, 1.0]), DenseVector::zeros(2))
            .unwrap();
        let x = v(&[1.0, 1.0]);
        let g = q.gradient(&x).unwrap();
        assert_eq!(g.as_slice(), &[2.0, 1.0]);
        let want = v(&[4.0, 1.0]).normalized(0.0).unwrap();
        for eps in [1e-1, 1e-3, 1e-6] {
            let m = inertia_hessian_gradient(&q, &x, &g, eps, DEFAULT_MTOL).unwrap().unwrap();
            assert!((m[0] - want[0]).abs() < 1e-9 && (m[1] - want[1]).abs() < 1e-9, "eps {eps}: {m:?}");
        }
        assert_eq!(
            inertia_hessian_gradient(&q, &DenseVector::zeros(2), &DenseVector::zeros(2), 1e-3, DEFAULT_MTOL).unwrap(),
            None
        );
        assert!(inertia_hessian_gradient(&q, &x, &g, 0.0, DEFAULT_MTOL).is_err());
    }

    #[test]
    fn hessian_gradient_on_identity_is_gradient_direction() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::identity(3), DenseVector::zeros(3)).unwrap();
        let x = v(&[0.3, -1.2, 2.0]);
        let g = q.gradient(&x).unwrap();
        let m = inertia_hessian_gradient(&q, &x, &g, 1e-3, DEFAULT_MTOL).unwrap().unwrap();
        let want = g.normalized(0.0).unwrap();
        for i in 0..3 {
            assert!((m[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn strategies_without_history_return_sentinel() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::identity(2), DenseVector::zeros(2)).unwrap();
        let x = v(&[1.0, 1.0]);
        let g = v(&[1.0, 1.0]);
        for kind in [InertiaKind::Velocity, InertiaKind::Acceleration, InertiaKind::QuasiNewton] {
            let out = InertiaStrategy::new(kind).produce(&q, &x, &g, None).unwrap();
            assert!(out.m.is_none(), "{kind}");
            assert_eq!(out.extra_grad_evals, 0);
        }
    }

    #[test]
    fn quasi_newton_falls_back_on_negative_curvature() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::identity(2), DenseVector::zeros(2)).unwrap();
        let hist = History { x_prev: v(&[0.0, 0.0]), g_prev: v(&[2.0, 0.0]) };
        let out = InertiaStrategy::new(InertiaKind::QuasiNewton)
            .produce(&q, &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), Some(&hist))
            .unwrap();
        assert!(out.m.is_none());
        assert!(out.fell_back);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("hg".parse::<InertiaKind>().unwrap(), InertiaKind::HessianGradient);
        assert_eq!("quasi_newton".parse::<InertiaKind>().unwrap(), InertiaKind::QuasiNewton);
        assert!("bogus".parse::<InertiaKind>().is_err());
    }
}
