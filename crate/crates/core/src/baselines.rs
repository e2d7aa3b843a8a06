//! Comparison methods: gradient descent, heavy ball, Nesterov with
//! backtracking, AdaGrad and Adam.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, AimError, Result};
use crate::metric::MetricDescriptor;
use crate::oracle::ObjectiveOracle;
use crate::trace::{IterRecord, RunStatus, RunTrace};
use crate::vector::DenseVector;

/// Consecutive increases of `f` that count as divergence.
pub const DIVERGENCE_WINDOW: usize = 10;
/// Halvings allowed in one Nesterov backtracking search.
pub const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Gd,
    Hb,
    Nag,
    Adagrad,
    Adam,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 5] =
        [BaselineMethod::Gd, BaselineMethod::Hb, BaselineMethod::Nag, BaselineMethod::Adagrad, BaselineMethod::Adam];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::Gd => "gd",
            BaselineMethod::Hb => "hb",
            BaselineMethod::Nag => "nag",
            BaselineMethod::Adagrad => "adagrad",
            BaselineMethod::Adam => "adam",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineMethod {
    type Err = AimError;
    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| AimError::InvalidParameter { name: "method", reason: format!("unknown baseline {s:?}") })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    /// Step size; the initial trial step for Nesterov.
    pub beta: f64,
    /// Heavy-ball momentum.
    pub gamma: f64,
    /// Adam averaging weights.
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_stab: f64,
    pub gtol: f64,
    pub max_iters: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            method: BaselineMethod::Gd,
            beta: 1e-2,
            gamma: 0.9,
            alpha1: 0.9,
            alpha2: 0.999,
            eps_stab: 1e-8,
            gtol: 1e-6,
            max_iters: 5000,
        }
    }
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, beta: f64) -> Self {
        BaselineConfig { method, beta, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(AimError::InvalidParameter { name, reason: reason.to_string() })
        };
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", "must be a positive finite number");
        }
        if !(self.gtol > 0.0) {
            return bad("gtol", "must be > 0");
        }
        match self.method {
            BaselineMethod::Hb if !(0.0..1.0).contains(&self.gamma) => bad("gamma", "must lie in [0, 1)"),
            BaselineMethod::Adam if !(self.alpha1 > 0.0 && self.alpha1 < 1.0) => bad("alpha1", "must lie in (0, 1)"),
            BaselineMethod::Adam if !(self.alpha2 > 0.0 && self.alpha2 < 1.0) => bad("alpha2", "must lie in (0, 1)"),
            BaselineMethod::Adagrad | BaselineMethod::Adam if !(self.eps_stab > 0.0) => bad("eps_stab", "must be > 0"),
            _ => Ok(()),
        }
    }

    /// Step size from a gradient Lipschitz bound `D`: `1/D` for most methods,
    /// `(1 − γ)/D` for heavy ball.
    pub fn lipschitz_beta(&self, d: f64) -> f64 {
        match self.method {
            BaselineMethod::Hb => (1.0 - self.gamma) / d,
            _ => 1.0 / d,
        }
    }
}

/// How a baseline's step size is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    Fixed(f64),
    /// Derived from the oracle's Lipschitz hint.
    Lipschitz,
    /// Fewest iterations among converged runs over the listed values.
    Grid(Vec<f64>),
    /// Like `Grid`, with each factor multiplying `1/D` for the oracle's hint `D`.
    Scaled(Vec<f64>),
    /// The default grid, joined with the default scaled grid when the oracle
    /// has a Lipschitz hint.
    Auto,
}

pub fn default_beta_grid() -> Vec<f64> {
    vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0]
}

pub fn default_scale_factors() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
}

impl Default for BetaRule {
    fn default() -> Self {
        BetaRule::Auto
    }
}

fn hint(oracle: &dyn ObjectiveOracle) -> Result<f64> {
    match oracle.lipschitz_hint() {
        Some(d) if d > 0.0 && d.is_finite() => Ok(d),
        _ => Err(AimError::InvalidParameter { name: "beta_rule", reason: "objective has no usable Lipschitz hint".into() }),
    }
}

/// Resolves `rule` and runs the baseline, returning the chosen step size.
///
/// For a grid the best run is the converged one with the fewest iterations,
/// ties going to the larger step; if none converge, the one with the
/// smallest final gradient norm.
pub fn solve_with_rule(
    oracle: &dyn ObjectiveOracle,
    x0: &DenseVector,
    config: &BaselineConfig,
    rule: &BetaRule,
) -> Result<(f64, RunTrace)> {
    match rule {
        BetaRule::Fixed(beta) => Ok((*beta, solve_baseline(oracle, x0, &BaselineConfig { beta: *beta, ..config.clone() })?)),
        BetaRule::Lipschitz => {
            let beta = config.lipschitz_beta(hint(oracle)?);
            Ok((beta, solve_baseline(oracle, x0, &BaselineConfig { beta, ..config.clone() })?))
        }
        BetaRule::Grid(values) => grid_search(oracle, x0, config, values.clone()),
        BetaRule::Scaled(factors) => {
            let d = hint(oracle)?;
            grid_search(oracle, x0, config, factors.iter().map(|f| f / d).collect())
        }
        BetaRule::Auto => {
            let mut values = default_beta_grid();
            if let Ok(d) = hint(oracle) {
                values.extend(default_scale_factors().iter().map(|f| f / d));
            }
            grid_search(oracle, x0, config, values)
        }
    }
}

fn grid_search(
    oracle: &dyn ObjectiveOracle,
    x0: &DenseVector,
    config: &BaselineConfig,
    mut order: Vec<f64>,
) -> Result<(f64, RunTrace)> {
    if order.is_empty() {
        return Err(AimError::EmptyInput);
    }
    // largest first: oversized steps fail fast and the first converged
    // run bounds the cost of the smaller ones
    order.sort_by(|a, b| b.total_cmp(a));
    order.dedup();
    let mut best: Option<(f64, RunTrace)> = None;
    for beta in order {
        // a run needing more iterations than the best converged one cannot win
        let cap = match &best {
            Some((_, b)) if b.converged() => b.iterations().min(config.max_iters),
            _ => config.max_iters,
        };
        let trace = solve_baseline(oracle, x0, &BaselineConfig { beta, max_iters: cap, ..config.clone() })?;
        let better = match &best {
            None => true,
            Some((_, b)) => match (trace.converged(), b.converged()) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => trace.iterations() < b.iterations(),
                (false, false) => trace.final_grad_norm() < b.final_grad_norm(),
            },
        };
        if better {
            best = Some((beta, trace));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

pub fn solve_baseline(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    match config.method {
        BaselineMethod::Gd => solve_gd(oracle, x0, config),
        BaselineMethod::Hb => solve_heavy_ball(oracle, x0, config),
        BaselineMethod::Nag => solve_nag(oracle, x0, config),
        BaselineMethod::Adagrad => solve_adagrad(oracle, x0, config),
        BaselineMethod::Adam => solve_adam(oracle, x0, config),
    }
}

fn precheck(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<()> {
    config.validate()?;
    check_dim(oracle.dim(), x0.len())?;
    x0.check_finite()
}

fn eval(oracle: &dyn ObjectiveOracle, x: &DenseVector, evals: &mut usize) -> Result<(f64, DenseVector)> {
    *evals += 1;
    let (f, g) = oracle.value_grad(x)?;
    if !f.is_finite() {
        return Err(AimError::Evaluation(format!("objective value {f} is not finite")));
    }
    g.check_finite()?;
    Ok((f, g))
}

fn step_record(k: usize, x: DenseVector, f: f64, gnorm: f64, beta: f64, gamma: f64, elapsed: f64) -> IterRecord {
    IterRecord {
        k,
        x,
        f,
        grad_norm: gnorm,
        beta,
        gamma,
        r: 0.0,
        mu_used: 0.0,
        inner_rejections: 0,
        elapsed,
        metric: MetricDescriptor::identity(),
        step_mnorm_sq: 0.0,
    }
}

/// Shared loop for the one-evaluation-per-step methods. `step` maps
/// `(x, g)` to the next iterate and the momentum weight it used.
fn run_simple<S>(
    oracle: &dyn ObjectiveOracle,
    x0: &DenseVector,
    config: &BaselineConfig,
    mut step: S,
) -> Result<RunTrace>
where
    S: FnMut(&DenseVector, &DenseVector) -> Result<(DenseVector, f64)>,
{
    precheck(oracle, x0, config)?;
    let start = Instant::now();
    let mut evals = 0;
    let mut records = Vec::new();
    let finish = |records: Vec<IterRecord>, evals, status, message| RunTrace {
        solver: config.method.as_str().to_string(),
        records,
        status,
        total_grad_evals: evals,
        message,
    };

    let mut x = x0.clone();
    let (mut f, mut g) = match eval(oracle, &x, &mut evals) {
        Ok(v) => v,
        Err(e) => return Ok(finish(records, evals, RunStatus::Error, Some(e.to_string()))),
    };
    let mut increases = 0;
    for k in 0.. {
        let gnorm = g.norm();
        let elapsed = start.elapsed().as_secs_f64();
        let status = if gnorm < config.gtol {
            Some((RunStatus::Converged, None))
        } else if k >= config.max_iters {
            Some((RunStatus::MaxIters, None))
        } else if increases >= DIVERGENCE_WINDOW {
            Some((RunStatus::Error, Some(format!("objective increased for {DIVERGENCE_WINDOW} consecutive steps"))))
        } else {
            None
        };
        if let Some((status, msg)) = status {
            records.push(IterRecord::terminal(k, x, f, gnorm, config.beta, elapsed));
            return Ok(finish(records, evals, status, msg));
        }

        let (x_next, gamma) = step(&x, &g)?;
        let (f_next, g_next) = match eval(oracle, &x_next, &mut evals) {
            Ok(v) => v,
            Err(e) => {
                records.push(IterRecord::terminal(k, x, f, gnorm, config.beta, elapsed));
                return Ok(finish(records, evals, RunStatus::Error, Some(e.to_string())));
            }
        };
        increases = if f_next > f { increases + 1 } else { 0 };
        records.push(step_record(k, std::mem::replace(&mut x, x_next), f, gnorm, config.beta, gamma, elapsed));
        f = f_next;
        g = g_next;
    }
    unreachable!("the loop only exits by returning")
}

/// `x⁺ = x − β ∇f(x)`
pub fn solve_gd(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    let beta = config.beta;
    run_simple(oracle, x0, config, |x, g| {
        let mut next = x.clone();
        next.axpy(-beta, g)?;
        Ok((next, 0.0))
    })
}

/// `x⁺ = x − β ∇f(x) + γ (x − x_prev)`; the first step has no momentum.
pub fn solve_heavy_ball(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    let (beta, gamma) = (config.beta, config.gamma);
    let mut prev: Option<DenseVector> = None;
    run_simple(oracle, x0, config, |x, g| {
        let mut next = x.clone();
        next.axpy(-beta, g)?;
        let used = match &prev {
            Some(p) if gamma != 0.0 => {
                next.axpy(gamma, &x.sub(p)?)?;
                gamma
            }
            _ => 0.0,
        };
        prev = Some(x.clone());
        Ok((next, used))
    })
}

/// Per-coordinate `x⁺ = x − β g / √(ĥ + ε)` with `ĥ` the running sum of `g⊙g`.
pub fn solve_adagrad(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    let (beta, eps) = (config.beta, config.eps_stab);
    let mut h = vec![0.0; x0.len()];
    run_simple(oracle, x0, config, |x, g| {
        let mut next = x.clone();
        for i in 0..next.len() {
            h[i] += g[i] * g[i];
            next[i] -= beta * g[i] / (h[i] + eps).sqrt();
        }
        Ok((next, 0.0))
    })
}

/// Exponential averages `ĝ`, `ĥ` of `g` and `g⊙g` from zero, without bias
/// correction; `x⁺ = x − β ĝ / √(ĥ + ε)`.
pub fn solve_adam(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    let (beta, eps, a1, a2) = (config.beta, config.eps_stab, config.alpha1, config.alpha2);
    let mut gm = vec![0.0; x0.len()];
    let mut hm = vec![0.0; x0.len()];
    run_simple(oracle, x0, config, |x, g| {
        let mut next = x.clone();
        for i in 0..next.len() {
            gm[i] = a1 * gm[i] + (1.0 - a1) * g[i];
            hm[i] = a2 * hm[i] + (1.0 - a2) * g[i] * g[i];
            next[i] -= beta * gm[i] / (hm[i] + eps).sqrt();
        }
        Ok((next, 0.0))
    })
}

/// Positive root of `c θ² + β θ − β = 0` with `c = β_prev / θ_prev²`, the
/// largest `θ` with `(1 − θ) β / θ² ≤ β_prev / θ_prev²`.
pub fn nesterov_theta(beta: f64, beta_prev: f64, theta_prev: f64) -> f64 {
    let c = beta_prev / (theta_prev * theta_prev);
    // 2β / (β + √(β² + 4cβ)) avoids cancellation
    2.0 * beta / (beta + (beta * beta + 4.0 * c * beta).sqrt())
}

/// Nesterov's method with backtracking: at each step `β` is halved until
/// `f(x⁺) ≤ f(x̃) − β/2 ‖∇f(x̃)‖²`, where `x̃` is the extrapolated point and
/// `x⁺ = x̃ − β ∇f(x̃)`.
pub fn solve_nag(oracle: &dyn ObjectiveOracle, x0: &DenseVector, config: &BaselineConfig) -> Result<RunTrace> {
    precheck(oracle, x0, config)?;
    let start = Instant::now();
    let mut evals = 0;
    let mut records = Vec::new();
    let finish = |records: Vec<IterRecord>, evals, status, message| RunTrace {
        solver: BaselineMethod::Nag.as_str().to_string(),
        records,
        status,
        total_grad_evals: evals,
        message,
    };

    let mut x = x0.clone();
    let (mut f, mut g) = match eval(oracle, &x, &mut evals) {
        Ok(v) => v,
        Err(e) => return Ok(finish(records, evals, RunStatus::Error, Some(e.to_string()))),
    };
    let mut x_prev = x.clone();
    let mut beta_prev = config.beta;
    let mut theta_prev = 1.0;

    for k in 0.. {
        let gnorm = g.norm();
        let elapsed = start.elapsed().as_secs_f64();
        if gnorm < config.gtol || k >= config.max_iters {
            let status = if gnorm < config.gtol { RunStatus::Converged } else { RunStatus::MaxIters };
            records.push(IterRecord::terminal(k, x, f, gnorm, beta_prev, elapsed));
            return Ok(finish(records, evals, status, None));
        }

        let velocity = x.sub(&x_prev)?;
        let mut beta = beta_prev;
        let mut halvings = 0;
        let accepted = loop {
            let (theta, weight) = if k == 0 {
                (1.0, 0.0)
            } else {
                let theta = nesterov_theta(beta, beta_prev, theta_prev);
                (theta, theta * (1.0 - theta_prev) / theta_prev)
            };
            let mut x_ext = x.clone();
            if weight != 0.0 {
                x_ext.axpy(weight, &velocity)?;
            }
            let trial = eval(oracle, &x_ext, &mut evals).and_then(|(f_ext, g_ext)| {
                let mut x_next = x_ext.clone();
                x_next.axpy(-beta, &g_ext)?;
                let (f_next, g_next) = eval(oracle, &x_next, &mut evals)?;
                Ok((f_ext, g_ext, x_next, f_next, g_next))
            });
            let (f_ext, g_ext, x_next, f_next, g_next) = match trial {
                Ok(v) => v,
                Err(e) => break Err(e.to_string()),
            };
            if f_next <= f_ext - 0.5 * beta * g_ext.norm_sq() {
                break Ok((theta, weight, x_next, f_next, g_next));
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break Err(format!("backtracking exceeded {MAX_HALVINGS} halvings"));
            }
            beta *= 0.5;
        };

        match accepted {
            Ok((theta, weight, x_next, f_next, g_next)) => {
                let mut rec = step_record(k, x.clone(), f, gnorm, beta, weight, elapsed);
                rec.inner_rejections = halvings;
                records.push(rec);
                x_prev = std::mem::replace(&mut x, x_next);
                f = f_next;
                g = g_next;
                beta_prev = beta;
                theta_prev = theta;
            }
            Err(msg) => {
                records.push(IterRecord::terminal(k, x, f, gnorm, beta, elapsed));
                return Ok(finish(records, evals, RunStatus::Error, Some(msg)));
            }
        }
    }
    unreachable!("the loop only exits by returning")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseSymmetricMatrix;
    use crate::oracle::QuadraticObjective;

    fn half_sq(n: usize) -> QuadraticObjective {
        QuadraticObjective::new(DenseSymmetricMatrix::identity(n), DenseVector::zeros(n)).unwrap().with_lipschitz(1.0)
    }

    fn x1(v: f64) -> DenseVector {
        DenseVector::from(vec![v])
    }

    #[test]
    fn gd_examples() {
        let q = half_sq(1);
        let t = solve_gd(&q, &x1(1.0), &BaselineConfig::new(BaselineMethod::Gd, 1.0)).unwrap();
        assert_eq!(t.status, RunStatus::Converged);
        assert_eq!(t.iterations(), 1);

        let cfg = BaselineConfig { max_iters: 5, ..BaselineConfig::new(BaselineMethod::Gd, 1.5) };
        let t = solve_gd(&q, &x1(1.0), &cfg).unwrap();
        for w in t.records.windows(2) {
            assert!((w[1].x[0].abs() - 0.5 * w[0].x[0].abs()).abs() < 1e-15);
        }

        let t = solve_gd(&q, &x1(0.0), &BaselineConfig::default()).unwrap();
        assert_eq!(t.iterations(), 0);
        assert!(t.converged());
    }

    #[test]
    fn gd_divergence_is_an_error() {
        let q = half_sq(1);
        let t = solve_gd(&q, &x1(1.0), &BaselineConfig::new(BaselineMethod::Gd, 2.5)).unwrap();
        assert_eq!(t.status, RunStatus::Error);
        assert_eq!(t.iterations(), DIVERGENCE_WINDOW);
    }

    #[test]
    fn heavy_ball_examples() {
        let q = half_sq(1);
        let cfg = BaselineConfig { gamma: 0.5, max_iters: 2, ..BaselineConfig::new(BaselineMethod::Hb, 0.5) };
        let t = solve_heavy_ball(&q, &x1(1.0), &cfg).unwrap();
        assert_eq!(t.records[1].x[0], 0.5);
        assert_eq!(t.records[2].x[0], 0.0);

        let hb = BaselineConfig { gamma: 0.0, max_iters: 30, ..BaselineConfig::new(BaselineMethod::Hb, 0.3) };
        let gd = BaselineConfig { method: BaselineMethod::Gd, ..hb.clone() };
        let q2 = half_sq(2);
        let a = solve_heavy_ball(&q2, &DenseVector::from(vec![1.0, -2.0]), &hb).unwrap();
        let b = solve_gd(&q2, &DenseVector::from(vec![1.0, -2.0]), &gd).unwrap();
        let xs = |t: &RunTrace| t.records.iter().map(|r| r.x.clone()).collect::<Vec<_>>();
        assert_eq!(xs(&a), xs(&b));
    }

    #[test]
    fn heavy_ball_rejects_bad_gamma() {
        let cfg = BaselineConfig { gamma: 1.0, ..BaselineConfig::new(BaselineMethod::Hb, 0.1) };
        assert!(solve_heavy_ball(&half_sq(1), &x1(1.0), &cfg).is_err());
    }

    #[test]
    fn nesterov_theta_recursion() {
        let t1 = nesterov_theta(1.0, 1.0, 1.0);
        assert!((t1 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let t2 = nesterov_theta(1.0, 1.0, t1);
        assert!(((1.0 - t2) / (t2 * t2) - 1.0 / (t1 * t1)).abs() < 1e-12);
        assert!(t2 > 0.0 && t2 < t1);
    }

    #[test]
    fn nesterov_examples() {
        let q = half_sq(1);
        let t = solve_nag(&q, &x1(1.0), &BaselineConfig::new(BaselineMethod::Nag, 1.0)).unwrap();
        assert!(t.converged());
        assert_eq!(t.iterations(), 1);
        assert_eq!(t.records[0].inner_rejections, 0);
        assert_eq!(t.records[0].gamma, 0.0);
    }

    #[test]
    fn nesterov_backtracks_from_large_step() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::from_diagonal(&[10.0, 1.0]), DenseVector::zeros(2)).unwrap();
        let t = solve_nag(&q, &DenseVector::from(vec![1.0, 1.0]), &BaselineConfig::new(BaselineMethod::Nag, 1.0)).unwrap();
        assert!(t.converged(), "{:?}", t.message);
        assert!(t.records[0].inner_rejections > 0);
        assert!(t.records[0].beta <= 0.1);
    }

    #[test]
    fn adagrad_examples() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::identity(2), DenseVector::from(vec![-3.0, 0.0])).unwrap();
        let cfg = BaselineConfig { max_iters: 1, ..BaselineConfig::new(BaselineMethod::Adagrad, 0.1) };
        let t = solve_adagrad(&q, &DenseVector::zeros(2), &cfg).unwrap();
        // g⁰ = (3, 0): the first step is β g/√(g²+ε) ≈ β sign(g)
        let x1 = &t.records[1].x;
        assert!((x1[0] + 0.1 * 3.0 / (9.0f64 + 1e-8).sqrt()).abs() < 1e-15);
        assert_eq!(x1[1], 0.0);
    }

    #[test]
    fn adam_without_averaging_is_sign_like() {
        let q = QuadraticObjective::new(DenseSymmetricMatrix::identity(2), DenseVector::from(vec![-3.0, 0.5])).unwrap();
        // α → 0 is outside the admissible range, so use the smallest positive weights
        let cfg = BaselineConfig { alpha1: 1e-300, alpha2: 1e-300, max_iters: 1, ..BaselineConfig::new(BaselineMethod::Adam, 0.1) };
        let t = solve_adam(&q, &DenseVector::zeros(2), &cfg).unwrap();
        let x1 = &t.records[1].x;
        assert!((x1[0] + 0.1 * 3.0 / (9.0f64 + 1e-8).sqrt()).abs() < 1e-15);
        assert!((x1[1] - 0.1 * 0.5 / (0.25f64 + 1e-8).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_rule_picks_fastest_converged() {
        let q = half_sq(3);
        let (beta, t) = solve_with_rule(
            &q,
            &DenseVector::filled(3, 1.0),
            &BaselineConfig::new(BaselineMethod::Gd, 1.0),
            &BetaRule::default(),
        )
        .unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(t.iterations(), 1);
        let (beta, _) =
            solve_with_rule(&q, &DenseVector::filled(3, 1.0), &BaselineConfig::new(BaselineMethod::Hb, 1.0), &BetaRule::Lipschitz)
                .unwrap();
        assert!((beta - 0.1).abs() < 1e-15);
    }

    #[test]
    fn auto_rule_reaches_past_the_absolute_grid_on_flat_objectives() {
        let flat = |hint: Option<f64>| {
            let q = QuadraticObjective::new(DenseSymmetricMatrix::new(2, vec![1e-4, 0.0, 0.0, 1e-4]).unwrap(), DenseVector::zeros(2))
                .unwrap();
            match hint {
                Some(d) => q.with_lipschitz(d),
                None => q,
            }
        };
        let cfg = BaselineConfig { max_iters: 200, ..BaselineConfig::new(BaselineMethod::Gd, 1.0) };
        let x0 = DenseVector::filled(2, 1.0);
        let (beta, t) = solve_with_rule(&flat(Some(1e-4)), &x0, &cfg, &BetaRule::Auto).unwrap();
        assert!((beta - 1e4).abs() < 1e-8);
        assert_eq!(t.iterations(), 1);
        let (beta, _) = solve_with_rule(&flat(Some(1e-4)), &x0, &cfg, &BetaRule::Scaled(vec![0.5])).unwrap();
        assert!((beta - 5e3).abs() < 1e-8);
        // without a hint only the absolute grid is tried
        let (beta, t) = solve_with_rule(&flat(None), &x0, &cfg, &BetaRule::Auto).unwrap();
        assert_eq!(beta, 1.0);
        assert!(!t.converged());
        assert!(solve_with_rule(&flat(None), &x0, &cfg, &BetaRule::Scaled(vec![1.0])).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in BaselineMethod::ALL {
            assert_eq!(m.as_str().parse::<BaselineMethod>().unwrap(), m);
        }
        assert!("drsom".parse::<BaselineMethod>().is_err());
    }
}
