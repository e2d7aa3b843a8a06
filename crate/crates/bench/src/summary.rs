//! Result rows, summary tables and plot series.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aim_core::RunStatus;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, BenchError, Result};
use crate::spec::SolverKind;
use crate::trace_io;

/// Outcome of one (cell, solver, repetition) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub solver: String,
    pub cell: String,
    pub rep: usize,
    pub seed: u64,
    pub k: usize,
    pub time_s: f64,
    pub grad_norm: f64,
    pub f: f64,
    pub status: RunStatus,
    pub grad_evals: usize,
    /// Step size chosen for a baseline.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Cells in the order they first appear.
    #[value(name = "by_cell")]
    ByCell,
    /// Cells ordered by decreasing regularization weight.
    #[value(name = "by_lambda")]
    ByLambda,
}

impl FromStr for Layout {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "by_cell" => Ok(Layout::ByCell),
            "by_lambda" => Ok(Layout::ByLambda),
            other => Err(BenchError::Config(format!("unknown layout `{other}`"))),
        }
    }
}

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn solver_rank(label: &str) -> usize {
    match label {
        // between the last baseline and the first AIM variant
        DRSOM => 2 * SolverKind::ORDER.iter().position(|k| k.is_aim()).expect("ORDER has AIM variants") - 1,
        other => other.parse::<SolverKind>().map_or(usize::MAX, |k| 2 * k.rank()),
    }
}

fn lambda_of(cell: &str) -> Option<f64> {
    cell.strip_prefix("lambda=")?.parse().ok()
}

pub const DRSOM: &str = "DRSOM";
const REFERENCE_CSV: &str = include_str!("../data/reference.csv");

#[derive(Debug, Clone, Deserialize)]
struct ReferenceRow {
    problem: String,
    p: Option<f64>,
    m: Option<usize>,
    n: Option<usize>,
    r: Option<f64>,
    lambda: Option<f64>,
    k: f64,
    time_s: f64,
}

fn reference_rows() -> Vec<ReferenceRow> {
    csv::Reader::from_reader(REFERENCE_CSV.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .expect("bundled reference table parses")
}

/// Published (k, time) for the cell, if any. Desk-scale L2-Lp cells map to
/// the full-size cell with the same position in the size grid.
pub fn reference_for(cell: &str) -> Option<(f64, f64)> {
    let rows = reference_rows();
    if let Some(lambda) = lambda_of(cell) {
        return rows
            .iter()
            .find(|r| r.problem == "logistic" && r.lambda == Some(lambda))
            .map(|r| (r.k, r.time_s));
    }
    let mut p = None;
    let mut m = None;
    let mut n = None;
    let mut density = None;
    for part in cell.split('_') {
        let (key, value) = part.split_once('=')?;
        match key {
            "p" => p = value.parse::<f64>().ok(),
            "m" => m = value.parse::<usize>().ok(),
            "n" => n = value.parse::<usize>().ok(),
            "r" => density = value.parse::<f64>().ok(),
            _ => return None,
        }
    }
    let (p, m, n, density) = (p?, m?, n?, density?);
    let (m, n) = match crate::spec::DESK_SIZES.iter().position(|&s| s == (m, n)) {
        Some(i) => crate::spec::FULL_SIZES[i],
        None => (m, n),
    };
    rows.iter()
        .find(|r| r.problem == "l2lp" && r.p == Some(p) && r.m == Some(m) && r.n == Some(n) && r.r == Some(density))
        .map(|r| (r.k, r.time_s))
}

/// Summary CSV: one line per (cell, solver) with the median iteration count
/// and wall time over repetitions.
///
/// Columns are `solver,cell,k,time_s,converged,source`; `converged` reads
/// `c/n` over repetitions and `source` is `measured` or `paper`.
pub fn emit_summary(rows: &[ResultRow], layout: Layout, include_reference: bool) -> Result<String> {
    if rows.is_empty() {
        return Err(BenchError::EmptyRows);
    }
    let mut cells: Vec<&str> = Vec::new();
    for row in rows {
        if !cells.contains(&row.cell.as_str()) {
            cells.push(&row.cell);
        }
    }
    if layout == Layout::ByLambda {
        cells.sort_by(|a, b| {
            let (la, lb) = (lambda_of(a).unwrap_or(f64::NEG_INFINITY), lambda_of(b).unwrap_or(f64::NEG_INFINITY));
            lb.total_cmp(&la)
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["solver", "cell", "k", "time_s", "converged", "source"]).expect("in-memory write");
    for cell in cells {
        let mut groups: BTreeMap<(usize, &str), Vec<&ResultRow>> = BTreeMap::new();
        for row in rows.iter().filter(|r| r.cell == cell) {
            groups.entry((solver_rank(&row.solver), &row.solver)).or_default().push(row);
        }
        let mut lines: Vec<(usize, [String; 6])> = groups
            .into_iter()
            .map(|((rank, solver), group)| {
                let k = median(&group.iter().map(|r| r.k as f64).collect::<Vec<_>>());
                let t = median(&group.iter().map(|r| r.time_s).collect::<Vec<_>>());
                let conv = group.iter().filter(|r| r.status == RunStatus::Converged).count();
                (
                    rank,
                    [solver.to_string(), cell.to_string(), k.to_string(), format!("{t:.6}"), format!("{conv}/{}", group.len()), "measured".into()],
                )
            })
            .collect();
        if include_reference {
            if let Some((k, t)) = reference_for(cell) {
                lines.push((solver_rank(DRSOM), [DRSOM.into(), cell.to_string(), k.to_string(), t.to_string(), String::new(), "paper".into()]));
            }
        }
        lines.sort_by_key(|(rank, _)| *rank);
        for (_, line) in lines {
            w.write_record(&line).expect("in-memory write");
        }
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Replaces every `time_s` field with `-` so summaries can be compared
/// across runs.
pub fn mask_timing(summary: &str) -> String {
    let mut lines = summary.lines();
    let Some(header) = lines.next() else { return String::new() };
    let col = header.split(',').position(|h| h == "time_s");
    let mut out = format!("{header}\n");
    for line in lines {
        let mut fields: Vec<&str> = line.split(',').collect();
        if let Some(c) = col.filter(|&c| c < fields.len()) {
            fields[c] = "-";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes `plot/<cell>/<trace stem>.csv` with columns `k,f_gap,gnorm` for
/// every trace below `trace_dir`, where `f_gap = f − f_best` and `f_best` is
/// the smallest final objective among that cell's traces. Returns the
/// written paths.
pub fn emit_plot_data(trace_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let traces = trace_io::find_traces(trace_dir)?;
    let mut by_cell: BTreeMap<String, Vec<(PathBuf, Vec<(usize, f64, f64)>)>> = BTreeMap::new();
    for path in traces {
        let meta = trace_io::read_meta(&path)?;
        let series = trace_io::read_trace_csv(&path)?;
        if series.is_empty() {
            return Err(BenchError::Trace { path, reason: "no rows".into() });
        }
        by_cell.entry(meta.cell).or_default().push((path, series));
    }
    let mut written = Vec::new();
    for (cell, traces) in by_cell {
        let f_best = traces
            .iter()
            .map(|(_, s)| s.last().expect("non-empty").1)
            .filter(|f| f.is_finite())
            .fold(f64::INFINITY, f64::min);
        let dir = out_dir.join(&cell);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (path, series) in traces {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
            let out = dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&out).map_err(csv_err(&out))?;
            w.write_record(["k", "f_gap", "gnorm"]).map_err(csv_err(&out))?;
            for (k, f, g) in series {
                w.write_record([k.to_string(), (f - f_best).to_string(), g.to_string()]).map_err(csv_err(&out))?;
            }
            w.flush().map_err(io_err(&out))?;
            written.push(out);
        }
    }
    Ok(written)
}
