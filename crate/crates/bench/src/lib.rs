//! Experiment harness: builds benchmark problems from a JSON spec, runs the
//! AIM variants and the baselines on them, and writes traces and summaries.

pub mod error;
pub mod report;
pub mod run;
pub mod spec;
pub mod summary;
pub mod trace_io;

pub use error::{BenchError, Result};
pub use report::{verify_dir, VerifyReport};
pub use run::{run_experiment, ExperimentOutput};
pub use spec::{ExperimentSpec, L2LpCell, SolverKind, SolverSpec};
pub use summary::{emit_plot_data, emit_summary, mask_timing, Layout, ResultRow};
