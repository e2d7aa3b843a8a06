//! Runs every (cell, repetition, solver) combination of a spec.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aim_core::baselines::solve_with_rule;
use aim_core::problems::{generate_logistic, generate_synthetic, read_libsvm_file, LabeledData};
use aim_core::{
    solve_aim, BaselineConfig, DenseVector, InertiaStrategy, L2LpProblem, LogisticL2Problem, ObjectiveOracle,
    RunStatus, RunTrace, SolverConfig, SyntheticSpec,
};
use log::{info, warn};
use rayon::prelude::*;

use crate::error::{io_err, BenchError, Result};
use crate::spec::{ExperimentSpec, L2LpCell, LogisticData, ProblemSpec, SolverKind, SolverSpec};
use crate::summary::{emit_summary, write_results, Layout, ResultRow, RESULTS_FILE, SUMMARY_FILE};
use crate::trace_io::{write_trace, TraceMeta};

pub const TRACE_DIR: &str = "traces";
pub const RESOLVED_SPEC_FILE: &str = "spec.json";
/// Environment variable capping the number of cells run at once.
pub const THREADS_VAR: &str = "BENCH_THREADS";

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: String,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone)]
enum Instance {
    L2lp(L2LpCell),
    Logistic(f64),
}

#[derive(Debug, Clone)]
struct Task {
    cell: String,
    rep: usize,
    seed: u64,
    instance: Instance,
}

enum Dataset {
    None,
    Loaded(Arc<LabeledData>),
    Synthetic { m: usize, n: usize, density: f64 },
}

/// Seed of repetition `rep` of cell `index`.
pub fn cell_seed(base: u64, index: usize, rep: usize) -> u64 {
    base.wrapping_add(1000 * index as u64).wrapping_add(rep as u64)
}

fn tasks(spec: &ExperimentSpec) -> Vec<Task> {
    let mut out = Vec::new();
    match &spec.problem {
        ProblemSpec::L2lp(l) => {
            for (i, cell) in spec.l2lp_cells(l).into_iter().enumerate() {
                for rep in 0..spec.repetitions {
                    out.push(Task { cell: cell.id(), rep, seed: cell_seed(spec.seed, i, rep), instance: Instance::L2lp(cell) });
                }
            }
        }
        ProblemSpec::Logistic(l) => {
            // one data set per repetition, shared by all λ
            for &lambda in &l.lambdas {
                for rep in 0..spec.repetitions {
                    out.push(Task {
                        cell: format!("lambda={lambda:e}"),
                        rep,
                        seed: cell_seed(spec.seed, 0, rep),
                        instance: Instance::Logistic(lambda),
                    });
                }
            }
        }
    }
    out
}

fn build_oracle(spec: &ExperimentSpec, data: &Dataset, task: &Task) -> Result<Box<dyn ObjectiveOracle>> {
    match (&task.instance, &spec.problem) {
        (Instance::L2lp(cell), ProblemSpec::L2lp(l)) => {
            let syn = SyntheticSpec {
                zero_prob: l.zero_prob,
                noise_std: l.noise_std,
                ..SyntheticSpec::new(cell.m, cell.n, cell.density, task.seed)
            };
            let d = generate_synthetic(&syn)?;
            let lambda = l.lambda.unwrap_or(d.lambda);
            Ok(Box::new(L2LpProblem::new(d.a, d.b, lambda, cell.p, l.eps_smooth)?))
        }
        (Instance::Logistic(lambda), _) => {
            let (a, labels) = match data {
                Dataset::Loaded(d) => (d.a.clone(), d.labels.clone()),
                Dataset::Synthetic { m, n, density } => generate_logistic(&SyntheticSpec::new(*m, *n, *density, task.seed))?,
                Dataset::None => unreachable!("logistic tasks come with a data set"),
            };
            Ok(Box::new(LogisticL2Problem::new(a, labels, *lambda)?))
        }
        _ => unreachable!("tasks are built from the spec's problem"),
    }
}

struct SolverRun {
    trace: RunTrace,
    eta: Option<f64>,
    beta: Option<f64>,
}

fn run_solver(spec: &ExperimentSpec, solver: &SolverSpec, oracle: &dyn ObjectiveOracle) -> aim_core::Result<SolverRun> {
    let x0 = DenseVector::zeros(oracle.dim());
    match solver.name {
        SolverKind::Baseline(method) => {
            let config = BaselineConfig {
                method,
                gtol: spec.gtol,
                max_iters: spec.max_iters,
                ..solver.baseline.clone().unwrap_or_else(|| BaselineConfig::new(method, 1.0))
            };
            let rule = solver.beta_rule.clone().unwrap_or_default();
            let (beta, trace) = solve_with_rule(oracle, &x0, &config, &rule)?;
            Ok(SolverRun { trace, eta: None, beta: Some(beta) })
        }
        SolverKind::Aim(kind) => {
            let config = SolverConfig {
                gtol: spec.gtol,
                max_iters: spec.max_iters,
                ..solver.aim.clone().unwrap_or_default()
            };
            let strategy = InertiaStrategy { kind, ..solver.inertia.unwrap_or_else(|| InertiaStrategy::new(kind)) };
            let trace = solve_aim(oracle, &strategy, &x0, &config)?;
            Ok(SolverRun { trace, eta: Some(config.eta), beta: None })
        }
    }
}

fn run_task(spec: &ExperimentSpec, data: &Dataset, task: &Task, trace_root: &Path) -> Result<Vec<ResultRow>> {
    let oracle = build_oracle(spec, data, task)?;
    let mut rows = Vec::with_capacity(spec.solvers.len());
    for solver in &spec.solvers {
        let label = solver.name.label().to_string();
        let row = match run_solver(spec, solver, oracle.as_ref()) {
            Ok(run) => {
                let t = &run.trace;
                if t.status == RunStatus::Error {
                    warn!("{} {} rep {}: {}", task.cell, label, task.rep, t.message.as_deref().unwrap_or("error"));
                }
                let meta = TraceMeta {
                    solver: label.clone(),
                    solver_id: solver.name.id().to_string(),
                    cell: task.cell.clone(),
                    rep: task.rep,
                    seed: task.seed,
                    status: t.status,
                    grad_evals: t.total_grad_evals,
                    eta: run.eta,
                    beta: run.beta,
                    message: t.message.clone(),
                };
                let path = trace_root.join(&task.cell).join(format!("{}_rep{}.csv", solver.name.id(), task.rep));
                write_trace(&path, t, &meta)?;
                ResultRow {
                    solver: label,
                    cell: task.cell.clone(),
                    rep: task.rep,
                    seed: task.seed,
                    k: t.iterations(),
                    time_s: t.elapsed(),
                    grad_norm: t.final_grad_norm(),
                    f: t.final_f(),
                    status: t.status,
                    grad_evals: t.total_grad_evals,
                    beta: run.beta,
                }
            }
            Err(e) => {
                warn!("{} {} rep {}: {e}", task.cell, label, task.rep);
                ResultRow {
                    solver: label,
                    cell: task.cell.clone(),
                    rep: task.rep,
                    seed: task.seed,
                    k: 0,
                    time_s: 0.0,
                    grad_norm: f64::NAN,
                    f: f64::NAN,
                    status: RunStatus::Error,
                    grad_evals: 0,
                    beta: None,
                }
            }
        };
        rows.push(row);
    }
    info!("{} rep {} done", task.cell, task.rep);
    Ok(rows)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_VAR).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| BenchError::Config(format!("thread pool: {e}")))
}

pub fn layout_for(spec: &ExperimentSpec) -> Layout {
    match spec.problem {
        ProblemSpec::L2lp(_) => Layout::ByCell,
        ProblemSpec::Logistic(_) => Layout::ByLambda,
    }
}

/// Runs the experiment, writing traces, `results.csv`, `summary.csv` and the
/// resolved spec under `spec.output_dir`.
///
/// Configuration problems, including a missing data set, are reported before
/// anything runs. A solver failing on one cell is recorded as an `error` row.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let data = match &spec.problem {
        ProblemSpec::L2lp(_) => Dataset::None,
        ProblemSpec::Logistic(l) => match &l.data {
            LogisticData::Libsvm { path, n_features } => Dataset::Loaded(Arc::new(read_libsvm_file(path, *n_features)?)),
            LogisticData::Synthetic { m, n, density } => Dataset::Synthetic { m: *m, n: *n, density: *density },
        },
    };
    let out = spec.output_dir.clone();
    let trace_root = out.join(TRACE_DIR);
    fs::create_dir_all(&trace_root).map_err(io_err(&trace_root))?;
    let resolved = out.join(RESOLVED_SPEC_FILE);
    let text = serde_json::to_string_pretty(spec).map_err(|source| BenchError::Json { path: resolved.clone(), source })?;
    fs::write(&resolved, text).map_err(io_err(&resolved))?;

    let tasks = tasks(spec);
    info!("{} tasks × {} solvers", tasks.len(), spec.solvers.len());
    let pool = thread_pool()?;
    let per_task: Vec<Result<Vec<ResultRow>>> =
        pool.install(|| tasks.par_iter().map(|t| run_task(spec, &data, t, &trace_root)).collect());
    let mut rows = Vec::new();
    for r in per_task {
        rows.extend(r?);
    }

    write_results(&out.join(RESULTS_FILE), &rows)?;
    let summary = emit_summary(&rows, layout_for(spec), spec.include_reference)?;
    let summary_path = out.join(SUMMARY_FILE);
    fs::write(&summary_path, &summary).map_err(io_err(&summary_path))?;
    Ok(ExperimentOutput { rows, summary, output_dir: out })
}
