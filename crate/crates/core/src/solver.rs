//! The adaptive inertial iteration.
//!
//! One outer iteration builds an inertial direction `m` and weight `μ`, sets
//! the inertial weight `γ = μ β (mᵀg) / ‖m‖²` and tries
//!
//! ```text
//! x⁺ = x − β g + γ m          (= x − β M⁻¹ g)
//! ```
//!
//! The trial is accepted when the ratio
//! `r = β (x − x⁺)ᵀ(g − g⁺) / ‖x − x⁺‖²_M` does not exceed `η`; otherwise `β`
//! shrinks and the trial is repeated. After acceptance a small `r` lets `β`
//! grow for the next iteration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, AimError, Result};
use crate::inertia::{History, InertiaStrategy};
use crate::metric::{validate_mu, MetricDescriptor};
use crate::oracle::ObjectiveOracle;
use crate::trace::{IterRecord, RunStatus, RunTrace};
use crate::vector::{dot, DenseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Acceptance threshold `η ∈ (0, 1)`.
    pub eta: f64,
    /// Inertial weight `μ ∈ [0, 1)` for strategies that do not fix their own.
    pub mu: f64,
    /// Stop once `‖∇f‖ < gtol`.
    pub gtol: f64,
    pub beta0: f64,
    pub max_iters: usize,
    /// Rejected trials divide `β` by this (and by `r` when `r > 1`).
    pub shrink_divisor: f64,
    /// Accepted steps with `r` below this grow `β`.
    pub grow_trigger: f64,
    pub grow_factor: f64,
    /// Lower clamp on `r` in the growth rule.
    pub r_floor: f64,
    pub beta_max: f64,
    /// A rejection that would push `β` below this ends the run.
    pub beta_min: f64,
    /// Rejections allowed within one outer iteration.
    pub max_rejections: usize,
    /// When false `β` stays at `beta0`, and a trial with `r > η` is an error.
    pub adapt_beta: bool,
    /// Measure `r` against `‖Δ‖²_M` (true) or the Euclidean `‖Δ‖²` (false).
    pub relaxed_acceptance: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eta: 0.9,
            mu: 0.75,
            gtol: 1e-6,
            beta0: 1.0,
            max_iters: 5000,
            shrink_divisor: 1.5,
            grow_trigger: 0.5,
            grow_factor: 2.0,
            r_floor: 1e-3,
            beta_max: 1e6,
            beta_min: 1e-16,
            max_rejections: 60,
            adapt_beta: true,
            relaxed_acceptance: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(AimError::InvalidParameter { name, reason: reason.to_string() })
        };
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta", "must lie in (0, 1)");
        }
        validate_mu(self.mu)?;
        if !(self.gtol > 0.0) {
            return bad("gtol", "must be > 0");
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return bad("beta0", "must be a positive finite number");
        }
        if !(self.shrink_divisor > 1.0) {
            return bad("shrink_divisor", "must be > 1");
        }
        if !(self.r_floor > 0.0) {
            return bad("r_floor", "must be > 0");
        }
        if !(self.beta_max >= self.beta0) {
            return bad("beta_max", "must be >= beta0");
        }
        Ok(())
    }

    /// Constant step size, no adaptation.
    pub fn constant_beta(beta: f64, eta: f64) -> Self {
        SolverConfig { beta0: beta, eta, adapt_beta: false, ..Default::default() }
    }
}

/// `γ = μ (mᵀg / ‖m‖²) β`; zero for the sentinel or a zero direction.
pub fn compute_gamma(m: Option<&DenseVector>, g: &DenseVector, beta: f64, mu: f64) -> f64 {
    match m {
        Some(m) => {
            let mm = m.norm_sq();
            if mm == 0.0 {
                0.0
            } else {
                mu * dot(m, g) / mm * beta
            }
        }
        None => 0.0,
    }
}

fn check_partition(n: usize, partition: &[usize]) -> Result<()> {
    if partition.iter().any(|&b| b == 0) {
        return Err(AimError::InvalidParameter { name: "partition", reason: "empty block".into() });
    }
    check_dim(n, partition.iter().sum())
}

/// Per-block inertial weights `γ_j = μ_j (m_jᵀ g_j / ‖m_j‖²) β`.
///
/// Blocks whose slice of `m` is shorter than `mtol` get `γ_j = 0`.
pub fn compute_gamma_blockwise(
    m: &DenseVector,
    g: &DenseVector,
    beta: f64,
    mu_blocks: &[f64],
    partition: &[usize],
    mtol: f64,
) -> Result<Vec<f64>> {
    check_dim(m.len(), g.len())?;
    check_partition(m.len(), partition)?;
    check_dim(partition.len(), mu_blocks.len())?;
    let mut start = 0;
    let mut out = Vec::with_capacity(partition.len());
    for (&size, &mu) in partition.iter().zip(mu_blocks) {
        validate_mu(mu)?;
        let mj = &m[start..start + size];
        let gj = &g[start..start + size];
        let mm = dot(mj, mj);
        out.push(if mm.sqrt() < mtol || mm == 0.0 { 0.0 } else { mu * dot(mj, gj) / mm * beta });
        start += size;
    }
    Ok(out)
}

/// `x − β g + γ m`
pub fn aim_step(x: &DenseVector, g: &DenseVector, beta: f64, gamma: f64, m: Option<&DenseVector>) -> Result<DenseVector> {
    let mut out = x.clone();
    out.axpy(-beta, g)?;
    if let Some(m) = m {
        if gamma != 0.0 {
            out.axpy(gamma, m)?;
        }
    }
    Ok(out)
}

/// `x − β g + Γ m` with block-diagonal `Γ = diag(γ_1 I, ..., γ_T I)`.
pub fn aim_step_blockwise(
    x: &DenseVector,
    g: &DenseVector,
    beta: f64,
    gammas: &[f64],
    m: &DenseVector,
    partition: &[usize],
) -> Result<DenseVector> {
    check_dim(x.len(), m.len())?;
    check_partition(x.len(), partition)?;
    check_dim(partition.len(), gammas.len())?;
    let mut out = x.clone();
    out.axpy(-beta, g)?;
    let mut start = 0;
    for (&size, &gamma) in partition.iter().zip(gammas) {
        for i in start..start + size {
            out[i] += gamma * m[i];
        }
        start += size;
    }
    Ok(out)
}

/// `r = β (x − x⁺)ᵀ(g − g⁺) / ‖x − x⁺‖²_M`
///
/// Fails with [`AimError::Stationary`] when `x⁺ == x`.
pub fn step_ratio(
    x: &DenseVector,
    x_next: &DenseVector,
    g: &DenseVector,
    g_next: &DenseVector,
    beta: f64,
    d: &MetricDescriptor,
) -> Result<f64> {
    let delta = x.sub(x_next)?;
    let denom = d.norm_sq(&delta)?;
    if denom == 0.0 {
        return Err(AimError::Stationary);
    }
    let dg = g.sub(g_next)?;
    check_dim(delta.len(), dg.len())?;
    Ok(beta * dot(&delta, &dg) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaUpdate {
    pub accepted: bool,
    pub beta_next: f64,
}

/// Step-size schedule constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub shrink_divisor: f64,
    pub grow_trigger: f64,
    pub grow_factor: f64,
    pub r_floor: f64,
    pub beta_max: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::from(&SolverConfig::default())
    }
}

impl From<&SolverConfig> for StepSchedule {
    fn from(c: &SolverConfig) -> Self {
        StepSchedule {
            shrink_divisor: c.shrink_divisor,
            grow_trigger: c.grow_trigger,
            grow_factor: c.grow_factor,
            r_floor: c.r_floor,
            beta_max: c.beta_max,
        }
    }
}

impl StepSchedule {
    /// Rejects when `r > η` (`β ← β / 1.5 · min(1, 1/r)`); otherwise accepts and
    /// grows `β ← 2β / max(r, r_floor)` when `r < 0.5`, capped at `beta_max`.
    pub fn adapt(&self, beta: f64, r: f64, eta: f64) -> BetaUpdate {
        if !(r <= eta) {
            let scale = if r.is_finite() { (1.0 / r).min(1.0) } else { 0.0 };
            return BetaUpdate { accepted: false, beta_next: beta / self.shrink_divisor * scale };
        }
        let beta_next = if r < self.grow_trigger {
            (beta * self.grow_factor / r.max(self.r_floor)).min(self.beta_max)
        } else {
            beta
        };
        BetaUpdate { accepted: true, beta_next }
    }
}

/// [`StepSchedule::adapt`] with the default constants.
pub fn adapt_beta(beta: f64, r: f64, eta: f64) -> BetaUpdate {
    StepSchedule::default().adapt(beta, r, eta)
}

struct Run<'a> {
    oracle: &'a dyn ObjectiveOracle,
    start: Instant,
    records: Vec<IterRecord>,
    evals: usize,
    solver: String,
}

impl Run<'_> {
    fn eval(&mut self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        self.evals += 1;
        let (f, g) = self.oracle.value_grad(x)?;
        if !f.is_finite() {
            return Err(AimError::Evaluation(format!("objective value {f} is not finite")));
        }
        g.check_finite()?;
        Ok((f, g))
    }

    fn finish(mut self, terminal: Option<IterRecord>, status: RunStatus, message: Option<String>) -> RunTrace {
        if let Some(mut rec) = terminal {
            rec.elapsed = self.start.elapsed().as_secs_f64();
            self.records.push(rec);
        }
        RunTrace {
            solver: self.solver,
            records: self.records,
            status,
            total_grad_evals: self.evals,
            message,
        }
    }
}

/// Runs the adaptive inertial method from `x0`.
///
/// Invalid configuration or a dimension mismatch is returned as `Err`;
/// failures during the run end it with [`RunStatus::Error`] and a message.
pub fn solve_aim(
    oracle: &dyn ObjectiveOracle,
    strategy: &InertiaStrategy,
    x0: &DenseVector,
    config: &SolverConfig,
) -> Result<RunTrace> {
    config.validate()?;
    strategy.validate()?;
    check_dim(oracle.dim(), x0.len())?;
    x0.check_finite()?;

    let schedule = StepSchedule::from(config);
    let mut run = Run {
        oracle,
        start: Instant::now(),
        records: Vec::new(),
        evals: 0,
        solver: format!("aim_{}", strategy.kind),
    };

    let mut x = x0.clone();
    let (mut f, mut g) = match run.eval(&x) {
        Ok(v) => v,
        Err(e) => return Ok(run.finish(None, RunStatus::Error, Some(e.to_string()))),
    };
    let mut beta = config.beta0;
    let mut history: Option<History> = None;

    for k in 0.. {
        let gnorm = g.norm();
        if gnorm < config.gtol {
            let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
            return Ok(run.finish(Some(rec), RunStatus::Converged, None));
        }
        if k >= config.max_iters {
            let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
            return Ok(run.finish(Some(rec), RunStatus::MaxIters, None));
        }

        let inertia = match strategy.produce(oracle, &x, &g, history.as_ref()) {
            Ok(out) => out,
            Err(e) => {
                let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
                return Ok(run.finish(Some(rec), RunStatus::Error, Some(e.to_string())));
            }
        };
        run.evals += inertia.extra_grad_evals;
        let mu = inertia.mu.unwrap_or(config.mu);
        let metric = match inertia.m {
            Some(m) => match inertia.mu_complement {
                Some(c) => MetricDescriptor::with_complement(m, mu, c, strategy.mtol)?,
                None => MetricDescriptor::new(m, mu, strategy.mtol)?,
            },
            None => MetricDescriptor::identity(),
        };

        let mut rejections = 0usize;
        loop {
            let gamma = compute_gamma(metric.direction(), &g, beta, mu);
            let x_next = aim_step(&x, &g, beta, gamma, metric.direction())?;
            if x_next == x {
                let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
                return Ok(if gnorm < 10.0 * config.gtol {
                    run.finish(Some(rec), RunStatus::Converged, None)
                } else {
                    run.finish(Some(rec), RunStatus::Error, Some(AimError::Stationary.to_string()))
                });
            }
            let (f_next, g_next) = match run.eval(&x_next) {
                Ok(v) => v,
                Err(e) => {
                    let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
                    return Ok(run.finish(Some(rec), RunStatus::Error, Some(e.to_string())));
                }
            };
            let delta = x.sub(&x_next)?;
            let step_mnorm_sq = metric.norm_sq(&delta)?;
            let denom = if config.relaxed_acceptance { step_mnorm_sq } else { delta.norm_sq() };
            let r = beta * dot(&delta, &g.sub(&g_next)?) / denom;

            let update = if config.adapt_beta {
                schedule.adapt(beta, r, config.eta)
            } else if r <= config.eta {
                BetaUpdate { accepted: true, beta_next: beta }
            } else {
                let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
                let msg = format!("fixed step {beta} violates the acceptance test (r = {r})");
                return Ok(run.finish(Some(rec), RunStatus::Error, Some(msg)));
            };

            if !update.accepted {
                rejections += 1;
                if rejections > config.max_rejections || update.beta_next < config.beta_min {
                    let rec = IterRecord::terminal(k, x, f, gnorm, beta, 0.0);
                    let msg = format!("step size underflow after {rejections} rejections");
                    return Ok(run.finish(Some(rec), RunStatus::Error, Some(msg)));
                }
                beta = update.beta_next;
                continue;
            }

            run.records.push(IterRecord {
                k,
                x: x.clone(),
                f,
                grad_norm: gnorm,
                beta,
                gamma,
                r,
                mu_used: mu,
                inner_rejections: rejections,
                elapsed: run.start.elapsed().as_secs_f64(),
                metric,
                step_mnorm_sq,
            });
            history = Some(History { x_prev: std::mem::replace(&mut x, x_next), g_prev: std::mem::replace(&mut g, g_next) });
            f = f_next;
            beta = update.beta_next;
            break;
        }
    }
    unreachable!("the outer loop only exits by returning")
}
