//! Python module `aim`: objectives, the adaptive inertial solver, the
//! baselines and the numerical checks.

use std::sync::Arc;

use aim_core::baselines::solve_with_rule;
use aim_core::problems::{
    generate_logistic, generate_synthetic, parse_libsvm, read_libsvm_file, smooth_abs, L2LpProblem, LogisticL2Problem,
    SyntheticSpec,
};
use aim_core::solver::{aim_step as core_aim_step, compute_gamma as core_compute_gamma};
use aim_core::verify::{self, first_violation};
use aim_core::{
    AimError, BaselineConfig, BaselineMethod, BetaRule, DenseSymmetricMatrix, DenseVector, FnObjective,
    InertiaKind, InertiaStrategy, ObjectiveOracle, QuadraticObjective, RunTrace, SolverConfig,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: AimError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dense_matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseSymmetricMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    DenseSymmetricMatrix::new(n, rows.into_iter().flatten().collect()).map_err(py_err)
}

/// A smooth objective with value and gradient.
#[pyclass(module = "aim", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Objective {
    inner: Arc<dyn ObjectiveOracle>,
    kind: &'static str,
}

#[pymethods]
impl Objective {
    /// `½ xᵀHx − bᵀx`
    #[staticmethod]
    fn quadratic(h: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Self> {
        let q = QuadraticObjective::new(dense_matrix(h)?, DenseVector::from(b)).map_err(py_err)?;
        Ok(Objective { inner: Arc::new(q), kind: "quadratic" })
    }

    /// Seeded sparse L2-Lp regression instance; λ defaults to `‖Aᵀb‖∞ / 5`.
    #[staticmethod]
    #[pyo3(signature = (m, n, density, p, seed, lam=None, eps=0.1))]
    fn l2lp(m: usize, n: usize, density: f64, p: f64, seed: u64, lam: Option<f64>, eps: f64) -> PyResult<Self> {
        let d = generate_synthetic(&SyntheticSpec::new(m, n, density, seed)).map_err(py_err)?;
        let lambda = lam.unwrap_or(d.lambda);
        let problem = L2LpProblem::new(d.a, d.b, lambda, p, eps).map_err(py_err)?;
        Ok(Objective { inner: Arc::new(problem), kind: "l2lp" })
    }

    /// Seeded synthetic L2-regularized logistic regression instance.
    #[staticmethod]
    fn logistic(m: usize, n: usize, density: f64, lam: f64, seed: u64) -> PyResult<Self> {
        let (a, labels) = generate_logistic(&SyntheticSpec::new(m, n, density, seed)).map_err(py_err)?;
        let problem = LogisticL2Problem::new(a, labels, lam).map_err(py_err)?;
        Ok(Objective { inner: Arc::new(problem), kind: "logistic" })
    }

    /// Logistic regression on a LIBSVM file.
    #[staticmethod]
    #[pyo3(signature = (path, lam, n_features=None))]
    fn logistic_libsvm(path: &str, lam: f64, n_features: Option<usize>) -> PyResult<Self> {
        let data = read_libsvm_file(path, n_features).map_err(py_err)?;
        let problem = LogisticL2Problem::new(data.a, data.labels, lam).map_err(py_err)?;
        Ok(Objective { inner: Arc::new(problem), kind: "logistic" })
    }

    /// Wraps `func(x: list[float]) -> (f, grad)`.
    #[staticmethod]
    fn from_callable(dim: usize, func: Py<PyAny>) -> Self {
        let oracle = FnObjective::new(dim, move |x: &DenseVector| {
            Python::attach(|py| {
                let out = func
                    .bind(py)
                    .call1((x.as_slice().to_vec(),))
                    .and_then(|r| r.extract::<(f64, Vec<f64>)>())
                    .map_err(|e| AimError::Evaluation(e.to_string()))?;
                Ok((out.0, DenseVector::from(out.1)))
            })
        });
        Objective { inner: Arc::new(oracle), kind: "callable" }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<f64> {
        let x = DenseVector::from(x);
        py.detach(|| self.inner.value(&x)).map_err(py_err)
    }

    fn gradient(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = DenseVector::from(x);
        py.detach(|| self.inner.gradient(&x)).map(DenseVector::into_vec).map_err(py_err)
    }

    /// Relative error of the gradient against central differences.
    #[pyo3(signature = (x, h=None))]
    fn grad_check(&self, py: Python<'_>, x: Vec<f64>, h: Option<f64>) -> PyResult<f64> {
        let x = DenseVector::from(x);
        let h = h.unwrap_or_else(|| verify::default_fd_step(&x));
        py.detach(|| verify::grad_check(self.inner.as_ref(), &x, h)).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Objective(kind={:?}, dim={})", self.kind, self.inner.dim())
    }
}

/// Outcome of one solver run.
#[pyclass(module = "aim", frozen)]
struct Run {
    trace: RunTrace,
}

#[pymethods]
impl Run {
    #[getter]
    fn solver(&self) -> &str {
        &self.trace.solver
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.trace.status.as_str()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.trace.converged()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.trace.iterations()
    }

    #[getter]
    fn grad_evals(&self) -> usize {
        self.trace.total_grad_evals
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.trace.final_x().map(|x| x.as_slice().to_vec()).unwrap_or_default()
    }

    #[getter]
    fn f(&self) -> f64 {
        self.trace.final_f()
    }

    #[getter]
    fn grad_norm(&self) -> f64 {
        self.trace.final_grad_norm()
    }

    #[getter]
    fn elapsed(&self) -> f64 {
        self.trace.elapsed()
    }

    #[getter]
    fn message(&self) -> Option<String> {
        self.trace.message.clone()
    }

    /// Per-iterate `f`.
    #[getter]
    fn f_history(&self) -> Vec<f64> {
        self.trace.records.iter().map(|r| r.f).collect()
    }

    #[getter]
    fn grad_norm_history(&self) -> Vec<f64> {
        self.trace.records.iter().map(|r| r.grad_norm).collect()
    }

    #[getter]
    fn beta_history(&self) -> Vec<f64> {
        self.trace.records.iter().map(|r| r.beta).collect()
    }

    #[getter]
    fn r_history(&self) -> Vec<f64> {
        self.trace.records.iter().map(|r| r.r).collect()
    }

    /// First step violating the sufficient-decrease inequality, or `None`.
    fn descent_violation(&self, eta: f64) -> PyResult<Option<usize>> {
        Ok(first_violation(&verify::check_descent(&self.trace, eta).map_err(py_err)?))
    }

    /// First step whose acceptance ratio exceeds `eta`, or `None`.
    fn acceptance_violation(&self, eta: f64) -> PyResult<Option<usize>> {
        Ok(first_violation(&verify::check_acceptance(&self.trace, eta).map_err(py_err)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(solver={:?}, status={:?}, iterations={}, grad_norm={:e})",
            self.trace.solver,
            self.trace.status.as_str(),
            self.trace.iterations(),
            self.trace.final_grad_norm()
        )
    }
}

/// Adaptive inertial method from `x0`. `inertia` is one of `velocity`,
/// `acceleration`, `quasi_newton`, `hessian_gradient` (or `v`, `a`, `qn`, `hg`).
#[pyfunction]
#[pyo3(signature = (objective, x0, inertia="hg", eta=0.9, mu=0.75, beta0=1.0, gtol=1e-6, max_iters=5000, constant_beta=false))]
#[allow(clippy::too_many_arguments)]
fn solve_aim(
    py: Python<'_>,
    objective: &Objective,
    x0: Vec<f64>,
    inertia: &str,
    eta: f64,
    mu: f64,
    beta0: f64,
    gtol: f64,
    max_iters: usize,
    constant_beta: bool,
) -> PyResult<Run> {
    let kind: InertiaKind = inertia.parse().map_err(py_err)?;
    let config = SolverConfig { eta, mu, beta0, gtol, max_iters, adapt_beta: !constant_beta, ..Default::default() };
    let x0 = DenseVector::from(x0);
    let oracle = objective.inner.clone();
    let trace = py
        .detach(|| aim_core::solve_aim(oracle.as_ref(), &InertiaStrategy::new(kind), &x0, &config))
        .map_err(py_err)?;
    Ok(Run { trace })
}

/// Baseline `gd`, `hb`, `nag`, `adagrad` or `adam`. Without `beta` the step
/// size is tuned over the default grid.
#[pyfunction]
#[pyo3(signature = (objective, x0, method="gd", beta=None, gtol=1e-6, max_iters=5000))]
fn solve_baseline(
    py: Python<'_>,
    objective: &Objective,
    x0: Vec<f64>,
    method: &str,
    beta: Option<f64>,
    gtol: f64,
    max_iters: usize,
) -> PyResult<(f64, Run)> {
    let method: BaselineMethod = method.parse().map_err(py_err)?;
    let config = BaselineConfig { gtol, max_iters, ..BaselineConfig::new(method, beta.unwrap_or(1.0)) };
    let rule = beta.map_or_else(BetaRule::default, BetaRule::Fixed);
    let x0 = DenseVector::from(x0);
    let oracle = objective.inner.clone();
    let (beta, trace) = py.detach(|| solve_with_rule(oracle.as_ref(), &x0, &config, &rule)).map_err(py_err)?;
    Ok((beta, Run { trace }))
}

/// `γ = μ β mᵀg / ‖m‖²`
#[pyfunction]
fn compute_gamma(m: Vec<f64>, g: Vec<f64>, beta: f64, mu: f64) -> f64 {
    core_compute_gamma(Some(&DenseVector::from(m)), &DenseVector::from(g), beta, mu)
}

/// `x − βg + γm`
#[pyfunction]
fn aim_step(x: Vec<f64>, g: Vec<f64>, beta: f64, gamma: f64, m: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    let m = m.map(DenseVector::from);
    core_aim_step(&DenseVector::from(x), &DenseVector::from(g), beta, gamma, m.as_ref())
        .map(DenseVector::into_vec)
        .map_err(py_err)
}

#[pyfunction]
fn q_eta(eta: f64) -> PyResult<usize> {
    verify::q_eta(eta).map_err(py_err)
}

/// `gᵀH²g / gᵀHg`
#[pyfunction]
fn rayleigh_r(g: Vec<f64>, h: Vec<Vec<f64>>) -> PyResult<f64> {
    verify::rayleigh_r(&DenseVector::from(g), &dense_matrix(h)?).map_err(py_err)
}

/// `(θI + H)⁻¹ g`
#[pyfunction]
fn regularized_newton_step(h: Vec<Vec<f64>>, g: Vec<f64>, theta: f64) -> PyResult<Vec<f64>> {
    verify::regularized_newton_step(&dense_matrix(h)?, &DenseVector::from(g), theta)
        .map(DenseVector::into_vec)
        .map_err(py_err)
}

/// Polynomial-inertia step and its step size `β`.
#[pyfunction]
fn polynomial_inertia_step(h: Vec<Vec<f64>>, g: Vec<f64>, theta: f64) -> PyResult<(Vec<f64>, f64)> {
    let (step, coeffs) = verify::theorem33_step(&dense_matrix(h)?, &DenseVector::from(g), theta).map_err(py_err)?;
    Ok((step.into_vec(), coeffs.beta))
}

#[pyfunction]
#[pyo3(name = "smooth_abs", signature = (z, eps=0.1))]
fn py_smooth_abs(z: f64, eps: f64) -> f64 {
    smooth_abs(z, eps)
}

/// Parses LIBSVM text into `(rows, labels)` where each row is a list of
/// `(column, value)` pairs with 0-based columns.
#[pyfunction]
#[pyo3(signature = (text, n_features=None))]
fn read_libsvm(text: &str, n_features: Option<usize>) -> PyResult<(Vec<Vec<(usize, f64)>>, Vec<f64>)> {
    let data = parse_libsvm(text.as_bytes(), n_features).map_err(py_err)?;
    let rows = (0..data.a.rows()).map(|r| data.a.row(r).collect()).collect();
    Ok((rows, data.labels))
}

#[pymodule]
fn aim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Objective>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(solve_aim, m)?)?;
    m.add_function(wrap_pyfunction!(solve_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(compute_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(aim_step, m)?)?;
    m.add_function(wrap_pyfunction!(q_eta, m)?)?;
    m.add_function(wrap_pyfunction!(rayleigh_r, m)?)?;
    m.add_function(wrap_pyfunction!(regularized_newton_step, m)?)?;
    m.add_function(wrap_pyfunction!(polynomial_inertia_step, m)?)?;
    m.add_function(wrap_pyfunction!(py_smooth_abs, m)?)?;
    m.add_function(wrap_pyfunction!(read_libsvm, m)?)?;
    Ok(())
}
