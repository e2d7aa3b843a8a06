//! Trace files: `<stem>.csv` with one row per iterate, a `<stem>.steps.csv`
//! sidecar carrying the metric-norm data the verifier needs, and
//! `<stem>.meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use aim_core::{DenseVector, IterRecord, MetricDescriptor, RunStatus, RunTrace};
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, BenchError, Result};

pub const TRACE_HEADER: [&str; 7] = ["k", "f", "gnorm", "beta", "gamma", "r", "t"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub solver: String,
    pub solver_id: String,
    pub cell: String,
    pub rep: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub grad_evals: usize,
    /// Acceptance threshold for AIM runs.
    pub eta: Option<f64>,
    /// Step size chosen for baseline runs.
    pub beta: Option<f64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TraceRow {
    k: usize,
    f: f64,
    gnorm: f64,
    beta: f64,
    gamma: f64,
    r: f64,
    t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct StepRow {
    k: usize,
    step_mnorm_sq: f64,
    mu: f64,
    rejections: usize,
}

pub fn steps_path(trace_csv: &Path) -> PathBuf {
    trace_csv.with_extension("steps.csv")
}

pub fn meta_path(trace_csv: &Path) -> PathBuf {
    trace_csv.with_extension("meta.json")
}

/// Writes the three files for one run; `path` is the main CSV.
pub fn write_trace(path: &Path, trace: &RunTrace, meta: &TraceMeta) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for rec in &trace.records {
        w.serialize(TraceRow {
            k: rec.k,
            f: rec.f,
            gnorm: rec.grad_norm,
            beta: rec.beta,
            gamma: rec.gamma,
            r: rec.r,
            t: rec.elapsed,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let sp = steps_path(path);
    let mut w = csv::Writer::from_path(&sp).map_err(csv_err(&sp))?;
    for rec in &trace.records {
        w.serialize(StepRow {
            k: rec.k,
            step_mnorm_sq: rec.step_mnorm_sq,
            mu: rec.mu_used,
            rejections: rec.inner_rejections,
        })
        .map_err(csv_err(&sp))?;
    }
    w.flush().map_err(io_err(&sp))?;

    let mp = meta_path(path);
    let text = serde_json::to_string_pretty(meta).map_err(|source| BenchError::Json { path: mp.clone(), source })?;
    fs::write(&mp, text).map_err(io_err(&mp))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(csv_err(path))
}

pub fn read_meta(trace_csv: &Path) -> Result<TraceMeta> {
    let mp = meta_path(trace_csv);
    let text = fs::read_to_string(&mp).map_err(io_err(&mp))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json { path: mp, source })
}

/// Reads the main CSV only; step norms are zero and iterates are empty.
pub fn read_trace_csv(path: &Path) -> Result<Vec<(usize, f64, f64)>> {
    let header_ok = {
        let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
        r.headers().map_err(csv_err(path))?.iter().eq(TRACE_HEADER)
    };
    if !header_ok {
        return Err(BenchError::Trace { path: path.into(), reason: "unexpected header".into() });
    }
    Ok(read_rows::<TraceRow>(path)?.into_iter().map(|r| (r.k, r.f, r.gnorm)).collect())
}

/// Rebuilds a trace from its files. Iterates and metric directions are not
/// stored, so records carry empty `x` and the identity metric.
pub fn read_trace(path: &Path) -> Result<(TraceMeta, RunTrace)> {
    let meta = read_meta(path)?;
    let rows: Vec<TraceRow> = read_rows(path)?;
    let steps: Vec<StepRow> = read_rows(&steps_path(path))?;
    if rows.len() != steps.len() {
        return Err(BenchError::Trace {
            path: path.into(),
            reason: format!("{} rows but {} step rows", rows.len(), steps.len()),
        });
    }
    let records = rows
        .iter()
        .zip(&steps)
        .enumerate()
        .map(|(i, (row, step))| {
            if row.k != i || step.k != i {
                return Err(BenchError::Trace { path: path.into(), reason: format!("row {i} has k={}", row.k) });
            }
            Ok(IterRecord {
                k: row.k,
                x: DenseVector::zeros(0),
                f: row.f,
                grad_norm: row.gnorm,
                beta: row.beta,
                gamma: row.gamma,
                r: row.r,
                mu_used: step.mu,
                inner_rejections: step.rejections,
                elapsed: row.t,
                metric: MetricDescriptor::identity(),
                step_mnorm_sq: step.step_mnorm_sq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = RunTrace {
        solver: meta.solver_id.clone(),
        records,
        status: meta.status,
        total_grad_evals: meta.grad_evals,
        message: meta.message.clone(),
    };
    Ok((meta, trace))
}

/// All main trace CSVs below `dir`, sorted by path.
pub fn find_traces(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(io_err(&d))? {
            let p = entry.map_err(io_err(&d))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if is_trace_csv(&p) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn is_trace_csv(p: &Path) -> bool {
    let Some(name) = p.file_name().and_then(|n| n.to_str()) else { return false };
    name.ends_with(".csv") && !name.ends_with(".steps.csv") && meta_path(p).is_file()
}
