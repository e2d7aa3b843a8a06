//! Numerical checks of the method's guarantees on traces and small dense
//! instances.

use std::fmt;

use crate::dense::DenseSymmetricMatrix;
use crate::error::{check_dim, AimError, Result};
use crate::metric::MetricDescriptor;
use crate::oracle::ObjectiveOracle;
use crate::trace::RunTrace;
use crate::vector::{dot, DenseVector};

/// Largest dimension accepted by the characteristic-polynomial checks.
pub const MAX_CHAR_POLY_DIM: usize = 16;

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} k={} lhs={:.12e} rhs={:.12e} {}",
            self.name,
            self.k,
            self.lhs,
            self.rhs,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Index of the first failing line, if any.
pub fn first_violation(lines: &[CheckLine]) -> Option<usize> {
    lines.iter().find(|l| !l.pass).map(|l| l.k)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(AimError::InvalidParameter { name: "eta", reason: format!("{eta} is outside (0, 1)") })
    }
}

fn rate_coefficient(eta: f64, j: usize) -> f64 {
    (1.0 - 2.0 * eta) + 2.0 * j as f64 * (1.0 - eta)
}

/// Smallest `j ≥ 0` with `(1 − 2η) + 2j(1 − η) ≥ 0`.
pub fn q_eta(eta: f64) -> Result<usize> {
    check_eta(eta)?;
    // tolerance keeps η = 0.9 at 4 despite 1 − 0.9 rounding below 0.1
    Ok((0..).find(|&j| rate_coefficient(eta, j) >= -1e-12).expect("coefficient grows without bound"))
}

/// `f(x^{k+1}) ≤ f(x^k) − (1 − η)/β_k ‖x^k − x^{k+1}‖²_{M_k}` for each step,
/// with slack `1e-10 (1 + |f(x^k)|)`.
pub fn check_descent(trace: &RunTrace, eta: f64) -> Result<Vec<CheckLine>> {
    check_eta(eta)?;
    let mut out = Vec::new();
    for (k, w) in trace.records.windows(2).enumerate() {
        let (cur, next) = (&w[0], &w[1]);
        if cur.step_mnorm_sq == 0.0 && !cur.x.is_empty() && cur.x != next.x {
            return Err(AimError::InvalidTrace(format!("step {k} has no metric data")));
        }
        let rhs = cur.f - (1.0 - eta) / cur.beta * cur.step_mnorm_sq;
        let tol = 1e-10 * (1.0 + cur.f.abs());
        out.push(CheckLine { name: "descent", k, lhs: next.f, rhs, pass: next.f <= rhs + tol });
    }
    Ok(out)
}

/// Every recorded acceptance ratio satisfies `r ≤ η + 1e-12`.
pub fn check_acceptance(trace: &RunTrace, eta: f64) -> Result<Vec<CheckLine>> {
    check_eta(eta)?;
    let steps = trace.records.len().saturating_sub(1);
    Ok(trace.records[..steps]
        .iter()
        .enumerate()
        .map(|(k, rec)| CheckLine { name: "acceptance", k, lhs: rec.r, rhs: eta, pass: rec.r <= eta + 1e-12 })
        .collect())
}

/// `‖x^{k+1} − x*‖_{M_k} ≤ ‖x^k − x*‖_{M_k}` for each step (squared norms).
pub fn check_contraction(trace: &RunTrace, x_star: &DenseVector, eta: f64) -> Result<Vec<CheckLine>> {
    check_eta(eta)?;
    if eta > 0.5 {
        return Err(AimError::InvalidParameter { name: "eta", reason: "contraction needs eta <= 0.5".into() });
    }
    let mut out = Vec::new();
    for (k, w) in trace.records.windows(2).enumerate() {
        let metric = &w[0].metric;
        let before = metric.norm_sq(&w[0].x.sub(x_star)?)?;
        let after = metric.norm_sq(&w[1].x.sub(x_star)?)?;
        let tol = 1e-12 * (1.0 + before);
        out.push(CheckLine { name: "contraction", k, lhs: after, rhs: before, pass: after <= before + tol });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBoundReport {
    pub k: usize,
    /// `f(x^k) − f*`
    pub lhs: f64,
    /// `(‖x⁰ − x*‖²_M + C) / (2kβ)`
    pub rhs: f64,
    pub c: f64,
    pub q_eta: usize,
    pub satisfied: bool,
}

/// Checks `f(x^k) − f* ≤ (‖x⁰ − x*‖²_{M_0} + C) / (2kβ)` for every `k ≥ 1`,
/// where `C = −Σ_{j=1}^{q(η)−1} [(1 − 2η) + 2j(1 − η)] ‖x^j − x^{j+1}‖²_{M_j}`.
///
/// Each norm uses the metric recorded at its own step. The trace must come
/// from a run with constant step size `beta`.
pub fn check_rate_bound(
    trace: &RunTrace,
    x_star: &DenseVector,
    f_star: f64,
    beta: f64,
    eta: f64,
) -> Result<Vec<RateBoundReport>> {
    check_eta(eta)?;
    let steps = trace.records.len().saturating_sub(1);
    if let Some(rec) = trace.records[..steps].iter().find(|r| (r.beta - beta).abs() > 1e-15 * beta) {
        return Err(AimError::InvalidTrace(format!(
            "step {} used beta = {}, expected the constant {beta}",
            rec.k, rec.beta
        )));
    }
    let first = trace.records.first().ok_or(AimError::EmptyInput)?;
    let q = q_eta(eta)?;
    let c = -(1..q)
        .filter(|&j| j < steps)
        .map(|j| rate_coefficient(eta, j) * trace.records[j].step_mnorm_sq)
        .sum::<f64>();
    let d0 = first.metric.norm_sq(&first.x.sub(x_star)?)?;
    Ok(trace.records[1..]
        .iter()
        .map(|rec| {
            let lhs = rec.f - f_star;
            let rhs = (d0 + c) / (2.0 * rec.k as f64 * beta);
            let tol = 1e-12 * (1.0 + f_star.abs());
            RateBoundReport { k: rec.k, lhs, rhs, c, q_eta: q, satisfied: lhs <= rhs + tol }
        })
        .collect())
}

/// Relative secant residual `‖M s − α y‖ / ‖α y‖` for the metric `(m, μ)`.
///
/// `M` is rebuilt from `μ` alone, so for `μ` within `δ` of 1 the residual
/// carries a rounding floor of about `ε/δ`; [`check_secant_metric`] takes
/// a metric that kept its complement.
pub fn check_secant(m: &DenseVector, mu: f64, s: &DenseVector, y: &DenseVector, alpha: f64) -> Result<f64> {
    check_secant_metric(&MetricDescriptor::new(m.clone(), mu, 0.0)?, s, y, alpha)
}

/// Relative secant residual `‖M s − α y‖ / ‖α y‖`.
pub fn check_secant_metric(metric: &MetricDescriptor, s: &DenseVector, y: &DenseVector, alpha: f64) -> Result<f64> {
    check_dim(s.len(), y.len())?;
    let target = y.scaled(alpha);
    let scale = target.norm();
    if scale == 0.0 {
        return Err(AimError::ZeroVector);
    }
    Ok(metric.apply(s)?.sub(&target)?.norm() / scale)
}

/// `gᵀH²g / gᵀHg`
pub fn rayleigh_r(g: &DenseVector, h: &DenseSymmetricMatrix) -> Result<f64> {
    let hg = h.matvec(g)?;
    let den = dot(g, &hg);
    if den == 0.0 || !den.is_finite() {
        return Err(AimError::UndefinedRatio);
    }
    Ok(hg.norm_sq() / den)
}

/// Solves `(θI + H) d = g`.
pub fn regularized_newton_step(h: &DenseSymmetricMatrix, g: &DenseVector, theta: f64) -> Result<DenseVector> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(AimError::InvalidParameter { name: "theta", reason: "must be a positive finite number".into() });
    }
    h.shifted(theta).solve_spd(g)
}

fn relative_diff(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    let scale = b.norm();
    let diff = a.sub(b)?.norm();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// The inertial step `β M⁻¹ g` with `m = Hg`, `β = 1/θ`, `μ = 1/(1 + θ/r)`
/// against `(θI + H)⁻¹ g` for `H = hhᵀ`; returns the relative difference.
pub fn check_reg_newton_equiv_rank1(h: &DenseVector, g: &DenseVector, theta: f64) -> Result<f64> {
    check_dim(h.len(), g.len())?;
    let hess = DenseSymmetricMatrix::outer(h);
    let r = rayleigh_r(g, &hess)?;
    let m = h.scaled(dot(h, g));
    let mu = 1.0 / (1.0 + theta / r);
    let metric = MetricDescriptor::new(m, mu, 0.0)?;
    let aim = metric.apply_inverse(g)?.scaled(1.0 / theta);
    let newton = regularized_newton_step(&hess, g, theta)?;
    relative_diff(&aim, &newton)
}

/// Coefficients of the polynomial inertia that reproduces a regularized
/// Newton step.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialInertia {
    /// `b_0 = 0, b_1, ..., b_{n−1} = 1`
    pub b: Vec<f64>,
    pub beta: f64,
    /// `r/μ = θ b_1 − a_1`
    pub r_over_mu: f64,
}

/// From the characteristic coefficients `a_0..a_{n−1}` of `H` (monic,
/// `a_i` multiplying `tⁱ`) and `θ`: `b_{n−1} = 1`, `b_i = a_{i+1} − θ b_{i+1}`,
/// `b_0 = 0`, `r/μ = θ b_1 − a_1` and `β = 1 / (θ + a_0 / (r/μ))`.
///
/// `r/μ` is negative whenever `q(H)` is negative definite (odd `n` for SPD
/// `H`); only a vanishing or non-finite value is rejected.
pub fn theorem33_coeffs(char_coeffs: &[f64], theta: f64) -> Result<PolynomialInertia> {
    let n = char_coeffs.len();
    if n < 2 {
        return Err(AimError::InvalidParameter { name: "char_coeffs", reason: "need n >= 2".into() });
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(AimError::InvalidParameter { name: "theta", reason: "must be a positive finite number".into() });
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    for i in (1..n - 1).rev() {
        b[i] = char_coeffs[i + 1] - theta * b[i + 1];
    }
    let r_over_mu = theta * b[1] - char_coeffs[1];
    if !r_over_mu.is_finite() || r_over_mu.abs() <= f64::EPSILON * (theta * b[1].abs() + char_coeffs[1].abs()) {
        return Err(AimError::InvalidParameter { name: "r_over_mu", reason: format!("{r_over_mu} is degenerate") });
    }
    let beta = 1.0 / (theta + char_coeffs[0] / r_over_mu);
    if !beta.is_finite() {
        return Err(AimError::InvalidParameter { name: "beta", reason: "not finite".into() });
    }
    Ok(PolynomialInertia { b, beta, r_over_mu })
}

/// `Σ_{i≥1} b_i Hⁱ g` by Horner's rule.
fn poly_apply(h: &DenseSymmetricMatrix, b: &[f64], g: &DenseVector) -> Result<DenseVector> {
    let n = b.len();
    let mut v = g.scaled(b[n - 1]);
    for &bi in b[1..n - 1].iter().rev() {
        v = h.matvec(&v)?;
        v.axpy(bi, g)?;
    }
    h.matvec(&v)
}

/// The polynomial-inertia step `β (g − q(H) g / (r/μ))` and its coefficients.
pub fn theorem33_step(h: &DenseSymmetricMatrix, g: &DenseVector, theta: f64) -> Result<(DenseVector, PolynomialInertia)> {
    if h.dim() > MAX_CHAR_POLY_DIM {
        return Err(AimError::InvalidParameter {
            name: "H",
            reason: format!("dimension {} exceeds {MAX_CHAR_POLY_DIM}", h.dim()),
        });
    }
    check_dim(h.dim(), g.len())?;
    let coeffs = theorem33_coeffs(&h.char_poly(), theta)?;
    let m = poly_apply(h, &coeffs.b, g)?;
    let mut step = g.clone();
    step.axpy(-1.0 / coeffs.r_over_mu, &m)?;
    Ok((step.scaled(coeffs.beta), coeffs))
}

/// Relative difference between the polynomial-inertia step and
/// `(θI + H)⁻¹ g`.
pub fn check_theorem33_equiv(h: &DenseSymmetricMatrix, g: &DenseVector, theta: f64) -> Result<f64> {
    let (step, _) = theorem33_step(h, g, theta)?;
    relative_diff(&step, &regularized_newton_step(h, g, theta)?)
}

/// `1e-6 (1 + ‖x‖)`
pub fn default_fd_step(x: &DenseVector) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// Central-difference gradient check. Returns
/// `max_i |fd_i − g_i| / max(‖fd‖∞, 1e-12)`.
pub fn grad_check(oracle: &dyn ObjectiveOracle, x: &DenseVector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(AimError::InvalidParameter { name: "h", reason: "must be > 0".into() });
    }
    let g = oracle.gradient(x)?;
    let mut fd = DenseVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let fp = oracle.value(&probe)?;
        probe[i] = xi - h;
        let fm = oracle.value(&probe)?;
        probe[i] = xi;
        fd[i] = (fp - fm) / (2.0 * h);
    }
    let scale = fd.norm_inf().max(1e-12);
    Ok(fd.sub(&g)?.norm_inf() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inertia::{InertiaKind, InertiaStrategy};
    use crate::oracle::{FnObjective, QuadraticObjective};
    use crate::solver::{solve_aim, SolverConfig};
    use crate::trace::{IterRecord, RunStatus};

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::from(x.to_vec())
    }

    #[test]
    fn q_eta_examples() {
        assert_eq!(q_eta(0.4).unwrap(), 0);
        assert_eq!(q_eta(0.5).unwrap(), 0);
        assert_eq!(q_eta(0.9).unwrap(), 4);
        assert_eq!(q_eta(0.6).unwrap(), 1);
        assert!(q_eta(1.0).is_err());
        assert!(q_eta(0.0).is_err());
    }

    fn quadratic() -> QuadraticObjective {
        QuadraticObjective::new(DenseSymmetricMatrix::from_diagonal(&[3.0, 1.0, 0.5]), v(&[1.0, -1.0, 2.0])).unwrap()
    }

    #[test]
    fn descent_holds_on_a_run_and_flags_a_fabricated_step() {
        let q = quadratic();
        let cfg = SolverConfig::default();
        let mut trace = solve_aim(&q, &InertiaStrategy::new(InertiaKind::Velocity), &DenseVector::zeros(3), &cfg).unwrap();
        assert!(trace.converged());
        assert_eq!(first_violation(&check_descent(&trace, cfg.eta).unwrap()), None);
        trace.records[3].f += 1.0;
        assert_eq!(first_violation(&check_descent(&trace, cfg.eta).unwrap()), Some(2));
    }

    #[test]
    fn descent_is_vacuous_for_a_single_record() {
        let trace = RunTrace {
            solver: "x".into(),
            records: vec![IterRecord::terminal(0, v(&[0.0]), 0.0, 0.0, 1.0, 0.0)],
            status: RunStatus::Converged,
            total_grad_evals: 1,
            message: None,
        };
        assert!(check_descent(&trace, 0.9).unwrap().is_empty());
    }

    #[test]
    fn contraction_on_quadratic() {
        let q = quadratic();
        let xs = q.minimizer().unwrap();
        let cfg = SolverConfig { eta: 0.4, ..Default::default() };
        let trace = solve_aim(&q, &InertiaStrategy::new(InertiaKind::Velocity), &DenseVector::zeros(3), &cfg).unwrap();
        let lines = check_contraction(&trace, &xs, 0.4).unwrap();
        assert!(!lines.is_empty());
        assert_eq!(first_violation(&lines), None);
        assert!(check_contraction(&trace, &xs, 0.6).is_err());
    }

    #[test]
    fn rate_bound_on_constant_step_runs() {
        let q = quadratic();
        let xs = q.minimizer().unwrap();
        let fs = q.min_value().unwrap();
        for eta in [0.3, 0.4, 0.6, 0.9] {
            let beta = eta / 3.0;
            let cfg = SolverConfig::constant_beta(beta, eta);
            let trace = solve_aim(&q, &InertiaStrategy::new(InertiaKind::Velocity), &DenseVector::zeros(3), &cfg).unwrap();
            assert!(trace.converged(), "{eta}: {:?}", trace.message);
            let report = check_rate_bound(&trace, &xs, fs, beta, eta).unwrap();
            assert!(report.iter().all(|r| r.satisfied), "eta {eta}");
            if eta <= 0.5 {
                assert_eq!(report[0].c, 0.0);
            } else if eta == 0.9 {
                assert!(report[0].c > 0.0);
                assert_eq!(report[0].q_eta, 4);
            }
        }
        let adaptive = solve_aim(&q, &InertiaStrategy::new(InertiaKind::Velocity), &DenseVector::zeros(3), &SolverConfig::default())
            .unwrap();
        assert!(check_rate_bound(&adaptive, &xs, fs, 1.0, 0.9).is_err());
    }

    #[test]
    fn secant_examples() {
        let (m, s, y) = (v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[2.0, 0.0]));
        assert_eq!(check_secant(&m, 0.5, &s, &y, 1.0).unwrap(), 0.0);
        assert!(check_secant(&m, 0.6, &s, &y, 1.0).unwrap() > 0.01);
        assert!(check_secant(&m, 0.5, &s, &v(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn rayleigh_examples() {
        let h = DenseSymmetricMatrix::from_diagonal(&[2.0, 1.0]);
        assert_eq!(rayleigh_r(&v(&[1.0, 0.0]), &h).unwrap(), 2.0);
        assert!((rayleigh_r(&v(&[1.0, 1.0]), &h).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        let c = DenseSymmetricMatrix::from_diagonal(&[4.0, 4.0, 4.0]);
        assert_eq!(rayleigh_r(&v(&[0.3, -2.0, 1.0]), &c).unwrap(), 4.0);
        let singular = DenseSymmetricMatrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(rayleigh_r(&v(&[0.0, 1.0]), &singular), Err(AimError::UndefinedRatio));
    }

    #[test]
    fn regularized_newton_examples() {
        let g = v(&[2.0, 4.0]);
        let d = regularized_newton_step(&DenseSymmetricMatrix::zeros(2), &g, 2.0).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 2.0).abs() < 1e-15);
        let d = regularized_newton_step(&DenseSymmetricMatrix::from_diagonal(&[1.0, 3.0]), &g, 1.0).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
        let far = regularized_newton_step(&DenseSymmetricMatrix::from_diagonal(&[1.0, 3.0]), &g, 1e12).unwrap();
        assert!(far.norm() < 1e-11);
        assert!(regularized_newton_step(&DenseSymmetricMatrix::from_diagonal(&[-2.0, 1.0]), &g, 1.0).is_err());
        assert!(regularized_newton_step(&DenseSymmetricMatrix::zeros(2), &g, 0.0).is_err());
    }

    #[test]
    fn rank_one_equivalence_examples() {
        assert!(check_reg_newton_equiv_rank1(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1.0).unwrap() < 1e-15);
        assert_eq!(check_reg_newton_equiv_rank1(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 1.0), Err(AimError::UndefinedRatio));
        assert!(check_reg_newton_equiv_rank1(&v(&[0.3, -1.2, 2.0]), &v(&[1.0, 0.5, -0.7]), 0.37).unwrap() < 1e-12);
    }

    #[test]
    fn polynomial_coefficients_examples() {
        // H = diag(2, 1): a = (2, −3)
        for theta in [0.5, 1.0, 3.0] {
            let c = theorem33_coeffs(&[2.0, -3.0], theta).unwrap();
            assert_eq!(c.b, vec![0.0, 1.0]);
            assert_eq!(c.r_over_mu, theta + 3.0);
            assert!((c.beta - 1.0 / (theta + 2.0 / (theta + 3.0))).abs() < 1e-15);
        }
        let c = theorem33_coeffs(&[1.0, -2.0], 0.7).unwrap();
        assert!((c.r_over_mu - 2.7).abs() < 1e-15);
        assert!((c.beta - 1.0 / (0.7 + 1.0 / 2.7)).abs() < 1e-15);
        assert!(theorem33_coeffs(&[1.0], 1.0).is_err());
        assert!(theorem33_coeffs(&[2.0, -3.0], 0.0).is_err());
    }

    #[test]
    fn polynomial_step_worked_case() {
        let h = DenseSymmetricMatrix::from_diagonal(&[2.0, 1.0]);
        let (step, c) = theorem33_step(&h, &v(&[1.0, 1.0]), 1.0).unwrap();
        assert!((c.beta - 2.0 / 3.0).abs() < 1e-15);
        assert!((step[0] - 1.0 / 3.0).abs() < 1e-15 && (step[1] - 0.5).abs() < 1e-15);
        assert!(check_theorem33_equiv(&h, &v(&[1.0, 1.0]), 1.0).unwrap() < 1e-10);
        assert!(check_theorem33_equiv(&DenseSymmetricMatrix::identity(2), &v(&[0.4, -1.0]), 0.3).unwrap() < 1e-10);
    }

    #[test]
    fn polynomial_step_odd_dimension() {
        let h = DenseSymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let (_, c) = theorem33_step(&h, &v(&[1.0, 1.0, 1.0]), 0.5).unwrap();
        assert!(c.r_over_mu < 0.0);
        assert!(check_theorem33_equiv(&h, &v(&[1.0, -2.0, 0.5]), 0.5).unwrap() < 1e-10);
    }

    #[test]
    fn grad_check_examples() {
        let q = quadratic();
        let x = v(&[0.3, -0.7, 1.1]);
        assert!(grad_check(&q, &x, default_fd_step(&x)).unwrap() < 1e-9);
        let wrong = FnObjective::new(3, |x: &DenseVector| {
            let (f, g) = quadratic().value_grad(x)?;
            Ok((f, g.scaled(1.1)))
        });
        let err = grad_check(&wrong, &x, default_fd_step(&x)).unwrap();
        assert!((err - 0.1).abs() < 1e-6, "{err}");
    }
}
