//! Experiment specification read from JSON.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aim_core::{BaselineConfig, BaselineMethod, BetaRule, InertiaKind, InertiaStrategy, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, BenchError, Result};

/// A solver in the benchmark line-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverKind {
    Baseline(BaselineMethod),
    Aim(InertiaKind),
}

impl SolverKind {
    /// Reporting order used by every summary table.
    pub const ORDER: [SolverKind; 9] = [
        SolverKind::Baseline(BaselineMethod::Gd),
        SolverKind::Baseline(BaselineMethod::Hb),
        SolverKind::Baseline(BaselineMethod::Nag),
        SolverKind::Baseline(BaselineMethod::Adagrad),
        SolverKind::Baseline(BaselineMethod::Adam),
        SolverKind::Aim(InertiaKind::Velocity),
        SolverKind::Aim(InertiaKind::Acceleration),
        SolverKind::Aim(InertiaKind::QuasiNewton),
        SolverKind::Aim(InertiaKind::HessianGradient),
    ];

    /// Short lowercase name used in specs and file names.
    pub fn id(self) -> &'static str {
        match self {
            SolverKind::Baseline(m) => m.as_str(),
            SolverKind::Aim(InertiaKind::Velocity) => "aim_v",
            SolverKind::Aim(InertiaKind::Acceleration) => "aim_a",
            SolverKind::Aim(InertiaKind::QuasiNewton) => "aim_qn",
            SolverKind::Aim(InertiaKind::HessianGradient) => "aim_hg",
        }
    }

    /// Display name used in summary tables.
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Baseline(BaselineMethod::Gd) => "GD",
            SolverKind::Baseline(BaselineMethod::Hb) => "HB",
            SolverKind::Baseline(BaselineMethod::Nag) => "NAG",
            SolverKind::Baseline(BaselineMethod::Adagrad) => "AdaGrad",
            SolverKind::Baseline(BaselineMethod::Adam) => "Adam",
            SolverKind::Aim(InertiaKind::Velocity) => "AIM_v",
            SolverKind::Aim(InertiaKind::Acceleration) => "AIM_a",
            SolverKind::Aim(InertiaKind::QuasiNewton) => "AIM_QN",
            SolverKind::Aim(InertiaKind::HessianGradient) => "AIM_Hg",
        }
    }

    pub fn rank(self) -> usize {
        SolverKind::ORDER.iter().position(|&s| s == self).expect("ORDER lists every solver")
    }

    pub fn is_aim(self) -> bool {
        matches!(self, SolverKind::Aim(_))
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        if let Some(kind) = SolverKind::ORDER
            .iter()
            .find(|k| k.id() == key || k.label().to_ascii_lowercase() == key)
        {
            return Ok(*kind);
        }
        if let Some(rest) = key.strip_prefix("aim_") {
            if let Ok(kind) = rest.parse::<InertiaKind>() {
                return Ok(SolverKind::Aim(kind));
            }
        }
        Err(BenchError::Config(format!("unknown solver `{s}`")))
    }
}

impl TryFrom<String> for SolverKind {
    type Error = BenchError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolverKind> for String {
    fn from(s: SolverKind) -> String {
        s.id().to_string()
    }
}

/// One solver with optional overrides. In JSON either a bare name or an
/// object with a `name` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SolverEntry")]
pub struct SolverSpec {
    pub name: SolverKind,
    /// Baselines only; defaults to the step-size grid.
    pub beta_rule: Option<BetaRule>,
    /// Baselines only; `method`, `beta`, `gtol` and `max_iters` are ignored.
    pub baseline: Option<BaselineConfig>,
    /// AIM only; `gtol` and `max_iters` come from the experiment.
    pub aim: Option<SolverConfig>,
    /// AIM only; `kind` is taken from `name`.
    pub inertia: Option<InertiaStrategy>,
}

impl SolverSpec {
    pub fn named(name: SolverKind) -> Self {
        SolverSpec { name, beta_rule: None, baseline: None, aim: None, inertia: None }
    }
}

#[derive(Deserialize)]
struct SolverFields {
    name: SolverKind,
    #[serde(default)]
    beta_rule: Option<BetaRule>,
    #[serde(default)]
    baseline: Option<BaselineConfig>,
    #[serde(default)]
    aim: Option<SolverConfig>,
    #[serde(default)]
    inertia: Option<InertiaStrategy>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SolverEntry {
    Name(SolverKind),
    Full(SolverFields),
}

impl From<SolverEntry> for SolverSpec {
    fn from(e: SolverEntry) -> Self {
        match e {
            SolverEntry::Name(name) => SolverSpec::named(name),
            SolverEntry::Full(f) => SolverSpec {
                name: f.name,
                beta_rule: f.beta_rule,
                baseline: f.baseline,
                aim: f.aim,
                inertia: f.inertia,
            },
        }
    }
}

/// Size, density and exponent of one L2-Lp instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2LpCell {
    pub m: usize,
    pub n: usize,
    pub density: f64,
    pub p: f64,
}

impl L2LpCell {
    pub fn id(&self) -> String {
        format!("p={}_m={}_n={}_r={}", self.p, self.m, self.n, self.density)
    }
}

pub const DESK_SIZES: [(usize, usize); 3] = [(200, 100), (200, 200), (200, 300)];
pub const FULL_SIZES: [(usize, usize); 3] = [(1000, 500), (1000, 1000), (1000, 1500)];
pub const GRID_DENSITIES: [f64; 2] = [0.15, 0.25];
pub const GRID_EXPONENTS: [f64; 3] = [0.5, 1.0, 2.0];

/// The `p × (m, n) × r` grid, `p` outermost.
pub fn l2lp_grid(full_scale: bool) -> Vec<L2LpCell> {
    let sizes = if full_scale { FULL_SIZES } else { DESK_SIZES };
    let mut cells = Vec::new();
    for p in GRID_EXPONENTS {
        for (m, n) in sizes {
            for density in GRID_DENSITIES {
                cells.push(L2LpCell { m, n, density, p });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2LpSpec {
    /// Omitted: the standard grid.
    #[serde(default)]
    pub cells: Option<Vec<L2LpCell>>,
    #[serde(default = "default_eps_smooth")]
    pub eps_smooth: f64,
    /// Omitted: `‖Aᵀb‖∞ / 5` per instance.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_zero_prob")]
    pub zero_prob: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
}

fn default_eps_smooth() -> f64 {
    aim_core::problems::DEFAULT_SMOOTHING
}
fn default_zero_prob() -> f64 {
    0.5
}
fn default_noise_std() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum LogisticData {
    Libsvm {
        path: PathBuf,
        #[serde(default)]
        n_features: Option<usize>,
    },
    Synthetic { m: usize, n: usize, density: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticSpec {
    pub data: LogisticData,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

fn default_lambdas() -> Vec<f64> {
    vec![1e-5, 1e-6, 1e-7]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    L2lp(L2LpSpec),
    Logistic(LogisticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "default_gtol")]
    pub gtol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Append the published DRSOM figures to the summary.
    #[serde(default)]
    pub include_reference: bool,
    /// Use the full-size L2-Lp grid when no cells are listed.
    #[serde(default)]
    pub full_scale: bool,
}

fn default_solvers() -> Vec<SolverSpec> {
    SolverKind::ORDER.iter().map(|&k| SolverSpec::named(k)).collect()
}
fn default_gtol() -> f64 {
    1e-6
}
fn default_max_iters() -> usize {
    5000
}
fn default_repetitions() -> usize {
    3
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("bench_out")
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Reads a spec; a relative `output_dir` or dataset path is resolved
    /// against the current directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.solvers.is_empty() {
            return bad("solver list is empty".into());
        }
        if !(self.gtol > 0.0 && self.gtol.is_finite()) {
            return bad(format!("gtol must be positive, got {}", self.gtol));
        }
        if self.max_iters == 0 || self.repetitions == 0 {
            return bad("max_iters and repetitions must be positive".into());
        }
        for s in &self.solvers {
            if let Some(aim) = &s.aim {
                aim.validate()?;
            }
            if let Some(inertia) = &s.inertia {
                inertia.validate()?;
            }
            if let Some(BetaRule::Grid(v) | BetaRule::Scaled(v)) = &s.beta_rule {
                if v.is_empty() {
                    return bad(format!("{}: empty step-size grid", s.name));
                }
            }
        }
        match &self.problem {
            ProblemSpec::L2lp(l) => {
                if !(l.eps_smooth > 0.0) {
                    return bad("eps_smooth must be positive".into());
                }
                if let Some(lambda) = l.lambda {
                    if !(lambda >= 0.0 && lambda.is_finite()) {
                        return bad(format!("lambda must be finite and >= 0, got {lambda}"));
                    }
                }
                let cells = self.l2lp_cells(l);
                if cells.is_empty() {
                    return bad("cell list is empty".into());
                }
                for c in cells {
                    if c.m == 0 || c.n == 0 || !(c.density > 0.0 && c.density <= 1.0) || !(c.p > 0.0) {
                        return bad(format!("invalid cell {}", c.id()));
                    }
                }
            }
            ProblemSpec::Logistic(l) => {
                if l.lambdas.is_empty() {
                    return bad("lambda list is empty".into());
                }
                if l.lambdas.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                    return bad("lambdas must be finite and >= 0".into());
                }
                match &l.data {
                    LogisticData::Libsvm { path, .. } => {
                        if !path.is_file() {
                            return bad(format!("dataset {} not found", path.display()));
                        }
                    }
                    LogisticData::Synthetic { m, n, density } => {
                        if *m == 0 || *n == 0 || !(*density > 0.0 && *density <= 1.0) {
                            return bad("invalid synthetic logistic data".into());
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn l2lp_cells(&self, l: &L2LpSpec) -> Vec<L2LpCell> {
        l.cells.clone().unwrap_or_else(|| l2lp_grid(self.full_scale))
    }
}
