//! Per-iteration records produced by every solver.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::AimError;
use crate::metric::MetricDescriptor;
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Error => "error",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = AimError;
    fn from_str(s: &str) -> Result<Self, AimError> {
        match s {
            "converged" => Ok(RunStatus::Converged),
            "max_iters" => Ok(RunStatus::MaxIters),
            "error" => Ok(RunStatus::Error),
            other => Err(AimError::InvalidParameter { name: "status", reason: other.to_string() }),
        }
    }
}

/// State at iterate `x^k` together with the step that left it.
///
/// `beta`, `gamma`, `r`, `mu_used`, `metric` and `step_mnorm_sq` describe the
/// accepted move `x^k → x^{k+1}`. On the last record of a trace no step was
/// taken: `gamma`, `r` and `step_mnorm_sq` are zero, the metric is the
/// identity and `beta` is the step size that would have been tried next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    pub x: DenseVector,
    pub f: f64,
    pub grad_norm: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r: f64,
    pub mu_used: f64,
    pub inner_rejections: usize,
    /// Seconds since the start of the run.
    pub elapsed: f64,
    pub metric: MetricDescriptor,
    /// `‖x^k − x^{k+1}‖²_{M_k}`
    pub step_mnorm_sq: f64,
}

impl IterRecord {
    pub(crate) fn terminal(k: usize, x: DenseVector, f: f64, grad_norm: f64, beta: f64, elapsed: f64) -> Self {
        IterRecord {
            k,
            x,
            f,
            grad_norm,
            beta,
            gamma: 0.0,
            r: 0.0,
            mu_used: 0.0,
            inner_rejections: 0,
            elapsed,
            metric: MetricDescriptor::identity(),
            step_mnorm_sq: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub solver: String,
    pub records: Vec<IterRecord>,
    pub status: RunStatus,
    pub total_grad_evals: usize,
    /// Error description when `status == Error`.
    pub message: Option<String>,
}

impl RunTrace {
    /// Number of accepted steps.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn final_x(&self) -> Option<&DenseVector> {
        self.records.last().map(|r| &r.x)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.grad_norm)
    }

    pub fn final_f(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f)
    }

    pub fn elapsed(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed)
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    /// Total rejected trial steps across the run.
    pub fn rejections(&self) -> usize {
        self.records.iter().map(|r| r.inner_rejections).sum()
    }
}
