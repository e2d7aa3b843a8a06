//! Benchmark objectives, data generation and LIBSVM input.

mod l2lp;
mod libsvm;
mod logistic;
mod synthetic;

pub use l2lp::{smooth_abs, smooth_abs_derivative, L2LpProblem, DEFAULT_SMOOTHING};
pub use libsvm::{parse_libsvm, read_libsvm_file, serialize_libsvm, LabeledData};
pub use logistic::{sigmoid, softplus, LogisticL2Problem};
pub use synthetic::{generate_logistic, generate_synthetic, SyntheticData, SyntheticSpec};
