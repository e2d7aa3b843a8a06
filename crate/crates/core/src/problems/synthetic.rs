//! Seeded random problem data.
//!
//! Every draw comes from a ChaCha20 generator seeded with `seed` and split
//! into independent streams: stream 0 for the matrix, 1 for the planted
//! vector, 2 for the noise (or labels).

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{AimError, Result};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

use super::logistic::sigmoid;

const STREAM_MATRIX: u64 = 0;
const STREAM_PLANTED: u64 = 1;
const STREAM_NOISE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// Probability that an entry of `A` is nonzero.
    pub density: f64,
    #[serde(default = "default_zero_prob")]
    pub zero_prob: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    pub seed: u64,
}

fn default_zero_prob() -> f64 {
    0.5
}

fn default_noise_std() -> f64 {
    1.0
}

impl SyntheticSpec {
    pub fn new(m: usize, n: usize, density: f64, seed: u64) -> Self {
        SyntheticSpec { m, n, density, zero_prob: 0.5, noise_std: 1.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(AimError::InvalidParameter { name: "m, n", reason: "must be positive".into() });
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(AimError::InvalidParameter { name: "density", reason: "must lie in (0, 1]".into() });
        }
        if !(0.0..=1.0).contains(&self.zero_prob) {
            return Err(AimError::InvalidParameter { name: "zero_prob", reason: "must lie in [0, 1]".into() });
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(AimError::InvalidParameter { name: "noise_std", reason: "must be finite and >= 0".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub a: SparseMatrix,
    pub b: DenseVector,
    /// The planted coefficient vector.
    pub v: DenseVector,
    /// `‖Aᵀb‖∞ / 5`
    pub lambda: f64,
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normal(std: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, std).map_err(|e| AimError::InvalidParameter { name: "std", reason: e.to_string() })
}

fn random_matrix(spec: &SyntheticSpec) -> Result<SparseMatrix> {
    let mut rng = stream(spec.seed, STREAM_MATRIX);
    let mask = Bernoulli::new(spec.density)
        .map_err(|e| AimError::InvalidParameter { name: "density", reason: e.to_string() })?;
    let unit = normal(1.0)?;
    // row-major, one mask draw per entry followed by a value draw when kept
    let mut rows = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let mut row = Vec::new();
        for c in 0..spec.n {
            if mask.sample(&mut rng) {
                row.push((c, unit.sample(&mut rng)));
            }
        }
        rows.push(row);
    }
    SparseMatrix::from_rows(spec.n, rows)
}

fn planted(spec: &SyntheticSpec) -> Result<DenseVector> {
    let mut rng = stream(spec.seed, STREAM_PLANTED);
    let dist = normal((1.0 / spec.n as f64).sqrt())?;
    Ok((0..spec.n)
        .map(|_| if rng.random_bool(spec.zero_prob) { 0.0 } else { dist.sample(&mut rng) })
        .collect::<Vec<_>>()
        .into())
}

/// Sparse regression data: `A` with Bernoulli(density) pattern and N(0,1)
/// values; `v` zero with probability `zero_prob`, else N(0, 1/n);
/// `b = Av + δ` with `δ ~ N(0, noise_std²)`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let a = random_matrix(spec)?;
    let v = planted(spec)?;
    let mut b = a.matvec(&v)?;
    let mut rng = stream(spec.seed, STREAM_NOISE);
    let noise = normal(spec.noise_std)?;
    for bi in b.iter_mut() {
        *bi += noise.sample(&mut rng);
    }
    let lambda = a.t_matvec(&b)?.norm_inf() / 5.0;
    Ok(SyntheticData { a, b, v, lambda })
}

/// Binary classification data with unit-norm sparse rows.
///
/// Rows follow the same pattern as [`generate_synthetic`] and are scaled to
/// unit length; label `i` is drawn as Bernoulli(σ(aᵢᵀv · √n)).
pub fn generate_logistic(spec: &SyntheticSpec) -> Result<(SparseMatrix, Vec<f64>)> {
    spec.validate()?;
    let raw = random_matrix(spec)?;
    let rows = (0..raw.rows())
        .map(|r| {
            let norm = raw.row(r).map(|(_, v)| v * v).sum::<f64>().sqrt();
            raw.row(r).map(|(c, v)| (c, v / norm)).collect()
        })
        .collect();
    let a = SparseMatrix::from_rows(spec.n, rows)?;
    let v = planted(spec)?.scaled((spec.n as f64).sqrt());
    let z = a.matvec(&v)?;
    let mut rng = stream(spec.seed, STREAM_NOISE);
    let labels = z.iter().map(|&zi| if rng.random_bool(sigmoid(zi)) { 1.0 } else { 0.0 }).collect();
    Ok((a, labels))
}
