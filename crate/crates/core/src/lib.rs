//! Adaptive inertial gradient methods with rank-one variable metrics.

pub mod baselines;
pub mod dense;
pub mod error;
pub mod inertia;
pub mod metric;
pub mod oracle;
pub mod problems;
pub mod solver;
pub mod sparse;
pub mod trace;
pub mod vector;
pub mod verify;

pub use dense::DenseSymmetricMatrix;
pub use error::{AimError, Result};
pub use inertia::{History, InertiaKind, InertiaOutput, InertiaStrategy};
pub use metric::MetricDescriptor;
pub use oracle::{FnObjective, ObjectiveOracle, QuadraticObjective};
pub use solver::{solve_aim, SolverConfig};
pub use sparse::SparseMatrix;
pub use trace::{IterRecord, RunStatus, RunTrace};
pub use vector::DenseVector;
pub use baselines::{solve_baseline, BaselineConfig, BaselineMethod, BetaRule};
pub use problems::{L2LpProblem, LogisticL2Problem, SyntheticSpec};
