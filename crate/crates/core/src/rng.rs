//! Seedable random streams and the distribution samplers the sampling models draw from.
//!
//! Every stream is a ChaCha8 generator keyed by a master seed with a 64-bit stream
//! selector, so `(master_seed, stream_id)` pins the draw sequence regardless of how
//! work is spread over threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A single-consumer random stream identified by `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub(crate) fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Dense row-major matrix used for replicate draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix shape does not match data");
        Self { rows, cols, data }
    }

    pub(crate) fn with_capacity(cols: usize, rows: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::with_capacity(rows * cols),
        }
    }

    pub(crate) fn push_row(&mut self, row: &[T]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on a zero chunk size
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Symmetric covariance matrix of dimension k.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;
const JITTER_SCALE: f64 = 1e-10;

impl CovarianceMatrix {
    /// Builds from row-major entries, checking symmetry to 1e-12 relative.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "covariance needs {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance entries must be finite"));
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::invalid(format!(
                        "covariance not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let k = values.len();
        let mut entries = vec![0.0; k * k];
        for (i, v) in values.iter().enumerate() {
            entries[i * k + i] = *v;
        }
        Self::new(k, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim]).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub(crate) fn set_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn max_diag(&self) -> f64 {
        (0..self.dim).fold(0.0f64, |m, i| m.max(self.get(i, i)))
    }
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerFactor {
    dim: usize,
    entries: Vec<f64>,
}

impl LowerFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// `L·Lᵀ` as a plain row-major vector.
    pub fn reconstruct(&self) -> Vec<f64> {
        let k = self.dim;
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = (0..=i.min(j)).map(|m| self.get(i, m) * self.get(j, m)).sum();
            }
        }
        out
    }

    fn apply(&self, z: &[f64], mean: &[f64], out: &mut [f64]) {
        let k = self.dim;
        for i in 0..k {
            let row = &self.entries[i * k..i * k + i + 1];
            out[i] = mean[i] + row.iter().zip(z).map(|(l, z)| l * z).sum::<f64>();
        }
    }
}

/// Semi-definite aware factorisation: zero pivots are allowed when the rest of the
/// column vanishes, so degenerate (e.g. all-zero) covariances still factor.
fn try_cholesky(a: &[f64], k: usize) -> std::result::Result<Vec<f64>, usize> {
    let scale = (0..k).fold(0.0f64, |m, i| m.max(a[i * k + i].abs()));
    let tol = 1e-12 * scale;
    let mut l = vec![0.0; k * k];
    for j in 0..k {
        let pivot = a[j * k + j] - (0..j).map(|m| l[j * k + m] * l[j * k + m]).sum::<f64>();
        if pivot > tol {
            let d = pivot.sqrt();
            l[j * k + j] = d;
            for i in (j + 1)..k {
                let s = a[i * k + j] - (0..j).map(|m| l[i * k + m] * l[j * k + m]).sum::<f64>();
                l[i * k + j] = s / d;
            }
        } else if pivot >= -tol {
            for i in (j + 1)..k {
                let s = a[i * k + j] - (0..j).map(|m| l[i * k + m] * l[j * k + m]).sum::<f64>();
                if s.abs() > tol {
                    return Err(j + 1);
                }
            }
        } else {
            return Err(j + 1);
        }
    }
    Ok(l)
}

/// Cholesky factor `L` with `L·Lᵀ = cov`.
///
/// On failure the diagonal is inflated once by `1e-10·max(diag)` and the factorisation
/// retried; a second failure reports the offending leading minor (1-based).
pub fn cholesky_lower(cov: &CovarianceMatrix) -> Result<LowerFactor> {
    let k = cov.dim;
    match try_cholesky(&cov.entries, k) {
        Ok(entries) => Ok(LowerFactor { dim: k, entries }),
        Err(_) => {
            let jitter = JITTER_SCALE * cov.max_diag();
            let mut a = cov.entries.clone();
            for i in 0..k {
                a[i * k + i] += jitter;
            }
            try_cholesky(&a, k)
                .map(|entries| LowerFactor { dim: k, entries })
                .map_err(|minor| Error::Decomposition { minor, dim: k })
        }
    }
}

pub fn normal_sample(mean: f64, sd: f64, count: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(sd >= 0.0) || !sd.is_finite() || !mean.is_finite() {
        return Err(Error::invalid(format!(
            "normal needs finite mean and sd >= 0, got mean {mean}, sd {sd}"
        )));
    }
    Ok((0..count).map(|_| mean + sd * rng.standard_normal()).collect())
}

fn check_mvn_shape(mean: &[f64], cov: &CovarianceMatrix) -> Result<()> {
    if mean.len() != cov.dim() {
        return Err(Error::invalid(format!(
            "mean has length {} but covariance has dimension {}",
            mean.len(),
            cov.dim()
        )));
    }
    Ok(())
}

/// Draws `count` i.i.d. rows from MVN(mean, cov).
pub fn mvn_sample(
    mean: &[f64],
    cov: &CovarianceMatrix,
    count: usize,
    rng: &mut RngStream,
) -> Result<Matrix<f64>> {
    check_mvn_shape(mean, cov)?;
    let l = cholesky_lower(cov)?;
    Ok(mvn_with_factor(mean, &l, count, rng))
}

pub(crate) fn mvn_with_factor(
    mean: &[f64],
    l: &LowerFactor,
    count: usize,
    rng: &mut RngStream,
) -> Matrix<f64> {
    let k = mean.len();
    let mut out = Matrix::with_capacity(k, count);
    let mut z = vec![0.0; k];
    let mut x = vec![0.0; k];
    for _ in 0..count {
        z.iter_mut().for_each(|v| *v = rng.standard_normal());
        l.apply(&z, mean, &mut x);
        out.push_row(&x);
    }
    out
}

pub const DEFAULT_MAX_ATTEMPT_FACTOR: f64 = 100.0;

/// Rejection sampler for MVN restricted to `x[i] > lower_bounds[i]` (strict).
///
/// Returns exactly `count` rows. Fails when the number of candidates needed would
/// exceed `max_attempt_factor · count`, i.e. when acceptance falls below
/// `1/max_attempt_factor`.
pub fn mvn_sample_lower_bounded(
    mean: &[f64],
    cov: &CovarianceMatrix,
    lower_bounds: &[Option<f64>],
    count: usize,
    max_attempt_factor: f64,
    rng: &mut RngStream,
) -> Result<Matrix<f64>> {
    check_mvn_shape(mean, cov)?;
    if lower_bounds.len() != mean.len() {
        return Err(Error::invalid("one lower bound per coordinate is required"));
    }
    if !(max_attempt_factor >= 1.0) {
        return Err(Error::invalid("max_attempt_factor must be at least 1"));
    }
    let l = cholesky_lower(cov)?;
    let (out, _) = bounded_with_factor(mean, &l, lower_bounds, count, max_attempt_factor, rng)?;
    Ok(out)
}

/// Returns the accepted rows and the number of candidates drawn.
pub(crate) fn bounded_with_factor(
    mean: &[f64],
    l: &LowerFactor,
    lower_bounds: &[Option<f64>],
    count: usize,
    max_attempt_factor: f64,
    rng: &mut RngStream,
) -> Result<(Matrix<f64>, usize)> {
    let k = mean.len();
    let max_attempts = (max_attempt_factor * count as f64).ceil() as usize;
    let mut out = Matrix::with_capacity(k, count);
    let mut z = vec![0.0; k];
    let mut x = vec![0.0; k];
    let mut attempts = 0usize;
    while out.rows() < count {
        if attempts >= max_attempts {
            return Err(Error::TruncationInfeasible {
                acceptance: out.rows() as f64 / attempts as f64,
                max_attempt_factor,
            });
        }
        attempts += 1;
        z.iter_mut().for_each(|v| *v = rng.standard_normal());
        l.apply(&z, mean, &mut x);
        let inside = x
            .iter()
            .zip(lower_bounds)
            .all(|(v, b)| b.map_or(true, |b| *v > b));
        if inside {
            out.push_row(&x);
        }
    }
    Ok((out, attempts))
}

fn binomial(n: u64, p: f64) -> Result<Binomial> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("binomial p must lie in [0,1], got {p}")));
    }
    Binomial::new(n, p).map_err(|e| Error::invalid(format!("binomial({n}, {p}): {e}")))
}

pub fn binomial_sample(n: u64, p: f64, count: usize, rng: &mut RngStream) -> Result<Vec<u64>> {
    let dist = binomial(n, p)?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Multinomial draws by sequential conditional binomials; each row sums to `n`.
pub fn multinomial_sample(
    n: u64,
    probs: &[f64],
    count: usize,
    rng: &mut RngStream,
) -> Result<Matrix<u64>> {
    if probs.is_empty() {
        return Err(Error::invalid("multinomial needs at least one category"));
    }
    if probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::invalid("multinomial probabilities must be non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() >= 1e-9 {
        return Err(Error::invalid(format!(
            "multinomial probabilities sum to {total}, not 1"
        )));
    }
    let k = probs.len();
    // conditional success probability of category j given the first j were skipped
    let mut conditional = Vec::with_capacity(k - 1);
    let mut left = 1.0;
    for p in &probs[..k - 1] {
        conditional.push(if left > 0.0 { (p / left).clamp(0.0, 1.0) } else { 0.0 });
        left -= p;
    }
    let mut out = Matrix::with_capacity(k, count);
    let mut row = vec![0u64; k];
    for _ in 0..count {
        let mut remaining = n;
        for (j, q) in conditional.iter().enumerate() {
            let x = if remaining == 0 || *q == 0.0 {
                0
            } else if *q == 1.0 {
                remaining
            } else {
                Binomial::new(remaining, *q)
                    .expect("conditional probability in [0,1]")
                    .sample(rng)
            };
            row[j] = x;
            remaining -= x;
        }
        row[k - 1] = remaining;
        out.push_row(&row);
    }
    Ok(out)
}

pub(crate) fn chi_square(df: f64) -> Result<ChiSquared<f64>> {
    ChiSquared::new(df).map_err(|e| Error::invalid(format!("chi-square df {df}: {e}")))
}
