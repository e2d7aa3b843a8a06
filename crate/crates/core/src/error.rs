use thiserror::Error;

/// Errors raised by the numeric kernels, solvers, problem builders and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AimError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// sᵀy ≤ 0: the objective is not locally strongly convex along the last step.
    #[error("curvature condition violated: s'y = {sty}")]
    CurvatureViolation { sty: f64 },

    #[error("degenerate secant pair: {0}")]
    DegenerateSecant(String),

    #[error("ratio is undefined (zero denominator)")]
    UndefinedRatio,

    #[error("linear system is singular or not positive definite")]
    Singular,

    #[error("step is stationary (x_next == x)")]
    Stationary,

    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("trace is unsuitable for this check: {0}")]
    InvalidTrace(String),

    #[error("objective evaluation failed: {0}")]
    Evaluation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AimError {
    fn from(e: std::io::Error) -> Self {
        AimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AimError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(AimError::DimensionMismatch { expected, got })
    }
}
