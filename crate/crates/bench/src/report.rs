//! Verification of stored AIM traces.

use std::fmt;
use std::path::{Path, PathBuf};

use aim_core::verify::{check_acceptance, check_descent, CheckLine};

use crate::error::Result;
use crate::trace_io::{find_traces, read_trace};

pub const REPORT_FILE: &str = "verify_report.txt";

/// Check counts for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVerdict {
    pub path: PathBuf,
    pub cell: String,
    pub solver: String,
    pub rep: usize,
    pub steps: usize,
    pub descent_failures: usize,
    pub acceptance_failures: usize,
}

impl TraceVerdict {
    pub fn passed(&self) -> bool {
        self.descent_failures == 0 && self.acceptance_failures == 0
    }
}

impl fmt::Display for TraceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} rep={} steps={} descent_failures={} acceptance_failures={} {}",
            self.cell,
            self.solver,
            self.rep,
            self.steps,
            self.descent_failures,
            self.acceptance_failures,
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub verdicts: Vec<TraceVerdict>,
    /// Traces without an acceptance threshold (baselines), not checked.
    pub skipped: usize,
    /// One line per check, prefixed with the trace's cell and solver.
    pub lines: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(TraceVerdict::passed)
    }

    pub fn total_steps(&self) -> usize {
        self.verdicts.iter().map(|v| v.steps).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.verdicts.iter().map(|v| v.descent_failures + v.acceptance_failures).sum()
    }
}

fn failures(lines: &[CheckLine]) -> usize {
    lines.iter().filter(|l| !l.pass).count()
}

/// Runs the descent and acceptance checks on every AIM trace below `dir`.
pub fn verify_dir(dir: &Path) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for path in find_traces(dir)? {
        let (meta, trace) = read_trace(&path)?;
        let Some(eta) = meta.eta else {
            report.skipped += 1;
            continue;
        };
        let descent = check_descent(&trace, eta)?;
        let acceptance = check_acceptance(&trace, eta)?;
        let prefix = format!("{} {} rep={}", meta.cell, meta.solver, meta.rep);
        report.lines.extend(descent.iter().chain(&acceptance).map(|l| format!("{prefix} {l}")));
        report.verdicts.push(TraceVerdict {
            path,
            cell: meta.cell,
            solver: meta.solver,
            rep: meta.rep,
            steps: trace.iterations(),
            descent_failures: failures(&descent),
            acceptance_failures: failures(&acceptance),
        });
    }
    Ok(report)
}
