//! Forrelation with the Hadamard transform replaced by an arbitrary real
//! orthogonal matrix.
//!
//! `rorr_U(f, g) = 2^{-n} sum_{x,y} f(x) g(y) U[x][y]` for `N = 2^n`. For a
//! fixed `f` the best `g` is the sign pattern of the column sums
//! `s_y = sum_x U[x][y] f(x)`, and the optimum is `|s|_1 / N`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, fabs, log, sqrt};
use rand::{Rng as _, RngCore};

use crate::boolfun::{Sign, TruthTable};
use crate::error::{invalid, Error, Result};
use crate::job::{chunk_count, chunk_range, Job};
use crate::seed::rng_for;

/// Tolerance on `|U^T U - I|` entries.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Largest `N` for which the exhaustive search over `f` is allowed.
pub const EXHAUSTIVE_MAX_DIM: usize = 16;

/// Restarts used by the local search unless told otherwise.
pub const DEFAULT_RESTARTS: u32 = 32;

/// Exceedance threshold of the l1-concentration experiment.
pub const L1_THRESHOLD: f64 = 0.99;

/// A square real matrix with orthonormal columns, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl OrthogonalMatrix {
    /// Checks orthogonality before accepting `data` (row-major, `dim * dim`).
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let m = Self { dim, data };
        if m.orthogonality_error() > ORTHOGONALITY_TOLERANCE {
            return Err(invalid("matrix is not orthogonal"));
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// `2^{-n/2} H^{(x)n}`, entries `(-1)^<x,y> / sqrt(2^n)`.
    pub fn normalized_hadamard(n: usize) -> Self {
        let dim = 1usize << n;
        let scale = 1.0 / sqrt(dim as f64);
        let mut data = Vec::with_capacity(dim * dim);
        for x in 0..dim {
            for y in 0..dim {
                let sign = if (x & y).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                data.push(sign * scale);
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Largest entry of `|U^T U - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(fabs(dot - target));
            }
        }
        worst
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| fabs(a[p * n + col]).total_cmp(&fabs(a[q * n + col])))
                .unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
        det
    }
}

fn check_dim(u: &OrthogonalMatrix, t: &TruthTable) -> Result<()> {
    if t.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: t.len(),
        });
    }
    Ok(())
}

pub fn rorr(u: &OrthogonalMatrix, f: &TruthTable, g: &TruthTable) -> Result<f64> {
    check_dim(u, f)?;
    check_dim(u, g)?;
    let mut total = 0.0;
    for x in 0..u.dim() {
        let row: f64 = u
            .row(x)
            .iter()
            .enumerate()
            .map(|(y, &v)| g.get(y).to_f64() * v)
            .sum();
        total += f.get(x).to_f64() * row;
    }
    Ok(total / u.dim() as f64)
}

/// `s_y = sum_x U[x][y] f(x)`.
pub fn column_sums(u: &OrthogonalMatrix, f: &TruthTable) -> Result<Vec<f64>> {
    check_dim(u, f)?;
    let mut s = vec![0.0; u.dim()];
    for x in 0..u.dim() {
        let fx = f.get(x).to_f64();
        for (acc, &v) in s.iter_mut().zip(u.row(x)) {
            *acc += fx * v;
        }
    }
    Ok(s)
}

fn sign_of(v: f64) -> Sign {
    if v < 0.0 {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

fn l1_value(s: &[f64]) -> f64 {
    s.iter().map(|v| fabs(*v)).sum::<f64>() / s.len() as f64
}

/// The maximising `g` for a fixed `f` (ties broken towards `+1`) and the
/// value it attains.
pub fn max_over_g(u: &OrthogonalMatrix, f: &TruthTable) -> Result<(TruthTable, f64)> {
    let s = column_sums(u, f)?;
    let n = f.arity();
    let g = TruthTable::from_fn(n, |y| sign_of(s[y]))?;
    Ok((g, l1_value(&s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    LocalSearch { restarts: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RorrMax {
    pub f: TruthTable,
    pub g: TruthTable,
    pub value: f64,
    /// True for an exhaustive search. A local-search value is only a lower
    /// bound on the maximum.
    pub exact: bool,
}

fn arity_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(invalid("matrix dimension must be a power of two"));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Maximum of `rorr_U(f, g)` over sign vectors.
pub fn max_rorr<R: RngCore + ?Sized>(
    u: &OrthogonalMatrix,
    mode: SearchMode,
    rng: &mut R,
) -> Result<RorrMax> {
    let n = arity_of(u.dim())?;
    let best_f = match mode {
        SearchMode::Exhaustive => exhaustive_best_f(u, n)?,
        SearchMode::LocalSearch { restarts } => {
            if restarts == 0 {
                return Err(invalid("local search needs at least one restart"));
            }
            let mut best: Option<(Vec<Sign>, f64)> = None;
            for _ in 0..restarts {
                let start: Vec<Sign> = (0..u.dim()).map(|_| Sign::from_bit(rng.gen())).collect();
                let (f, v) = hill_climb(u, start);
                if best.as_ref().map_or(true, |(_, b)| v > *b) {
                    best = Some((f, v));
                }
            }
            let (f, _) = best.expect("at least one restart");
            f
        }
    };
    let f = TruthTable::from_fn(n, |x| best_f[x])?;
    let (g, value) = max_over_g(u, &f)?;
    Ok(RorrMax {
        f,
        g,
        value,
        exact: mode == SearchMode::Exhaustive,
    })
}

/// Gray-code walk over every `f` with `f(0) = +1`; `-f` attains the same
/// value.
fn exhaustive_best_f(u: &OrthogonalMatrix, n: usize) -> Result<Vec<Sign>> {
    let dim = u.dim();
    if dim > EXHAUSTIVE_MAX_DIM {
        return Err(Error::ArityAboveCap {
            n,
            cap: EXHAUSTIVE_MAX_DIM.trailing_zeros() as usize,
        });
    }
    let mut f = vec![Sign::Plus; dim];
    let mut s: Vec<f64> = (0..dim).map(|y| (0..dim).map(|x| u.get(x, y)).sum()).collect();
    let mut best = (f.clone(), l1_value(&s));
    let free = dim - 1;
    for step in 1u64..1u64 << free {
        // Flip the coordinate of the lowest set bit of the step, skipping x = 0.
        let x = step.trailing_zeros() as usize + 1;
        let delta = -2.0 * f[x].to_f64();
        for (acc, &v) in s.iter_mut().zip(u.row(x)) {
            *acc += delta * v;
        }
        f[x] = -f[x];
        let value = l1_value(&s);
        if value > best.1 {
            best = (f.clone(), value);
        }
    }
    Ok(best.0)
}

/// Best-improvement single-flip ascent from `f`.
fn hill_climb(u: &OrthogonalMatrix, mut f: Vec<Sign>) -> (Vec<Sign>, f64) {
    let dim = u.dim();
    let mut s = vec![0.0; dim];
    for x in 0..dim {
        let fx = f[x].to_f64();
        for (acc, &v) in s.iter_mut().zip(u.row(x)) {
            *acc += fx * v;
        }
    }
    let mut value = l1_value(&s);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for x in 0..dim {
            let delta = -2.0 * f[x].to_f64();
            let candidate = s
                .iter()
                .zip(u.row(x))
                .map(|(acc, v)| fabs(acc + delta * v))
                .sum::<f64>()
                / dim as f64;
            if candidate > best.map_or(value, |b| b.1) + 1e-12 {
                best = Some((x, candidate));
            }
        }
        let Some((x, _)) = best else {
            // Recompute to shed accumulated rounding.
            let s_final: Vec<f64> = (0..dim)
                .map(|y| (0..dim).map(|i| f[i].to_f64() * u.get(i, y)).sum())
                .collect();
            return (f, l1_value(&s_final));
        };
        let delta = -2.0 * f[x].to_f64();
        for (acc, &v) in s.iter_mut().zip(u.row(x)) {
            *acc += delta * v;
        }
        f[x] = -f[x];
        value = l1_value(&s);
    }
}

/// A standard normal draw (Box-Muller).
pub fn gaussian<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    sqrt(-2.0 * log(u1)) * cos(core::f64::consts::TAU * u2)
}

/// Haar-distributed orthogonal matrix: Householder QR of a Gaussian matrix,
/// with each column of `Q` multiplied by the sign of the matching diagonal
/// entry of `R`.
pub fn sample_haar_orthogonal<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Result<OrthogonalMatrix> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let n = dim;
    // Column-major working copy: a[c * n + r].
    let mut a: Vec<f64> = (0..n * n).map(|_| gaussian(rng)).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        let x = &a[k * n + k..(k + 1) * n];
        let norm = sqrt(x.iter().map(|v| v * v).sum());
        let mut v = x.to_vec();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = sqrt(v.iter().map(|t| t * t).sum());
        for t in v.iter_mut() {
            *t /= vnorm;
        }
        for c in k..n {
            let col = &mut a[c * n + k..(c + 1) * n];
            let dot: f64 = col.iter().zip(&v).map(|(p, q)| p * q).sum();
            for (p, q) in col.iter_mut().zip(&v) {
                *p -= 2.0 * dot * q;
            }
        }
        reflectors.push(v);
    }
    let diag_signs: Vec<f64> = (0..n)
        .map(|k| if a[k * n + k] < 0.0 { -1.0 } else { 1.0 })
        .collect();

    // Q = H_0 H_1 ... H_{n-2}, built column-major by applying the reflectors
    // to the identity from the last one back.
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for c in 0..n {
            let col = &mut q[c * n + k..(c + 1) * n];
            let dot: f64 = col.iter().zip(v).map(|(p, t)| p * t).sum();
            for (p, t) in col.iter_mut().zip(v) {
                *p -= 2.0 * dot * t;
            }
        }
    }
    let mut data = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            data[r * n + c] = q[c * n + r] * diag_signs[c];
        }
    }
    OrthogonalMatrix::new(n, data)
}

/// Uniform unit vector in `R^dim`, as a normalised Gaussian vector.
pub fn haar_unit_vector<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = sqrt(v.iter().map(|t| t * t).sum());
        if norm > 0.0 {
            return v.into_iter().map(|t| t / norm).collect();
        }
    }
}

/// `E[|u|_1 / sqrt(N)]` for a uniform unit vector `u` in `R^N`:
/// `sqrt(N) Gamma(N/2) / (sqrt(pi) Gamma((N+1)/2))`.
pub fn expected_l1_ratio(dim: usize) -> f64 {
    let n = dim as f64;
    let log_ratio = libm::lgamma(n / 2.0) - libm::lgamma((n + 1.0) / 2.0);
    sqrt(n) * libm::exp(log_ratio) / sqrt(core::f64::consts::PI)
}

pub const L1_HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct L1Report {
    pub dim: usize,
    pub samples: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub threshold: f64,
    pub exceedances: u64,
    /// Counts of `|u|_1 / sqrt(N)` in equal bins over `[0, 1]`.
    pub histogram: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Tally {
    pub count: u64,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
    pub exceedances: u64,
    pub histogram: Vec<u64>,
}

impl Default for L1Tally {
    fn default() -> Self {
        Self {
            count: 0,
            sum: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            exceedances: 0,
            histogram: vec![0; L1_HISTOGRAM_BINS],
        }
    }
}

impl crate::job::Tally for L1Tally {
    fn merge(&mut self, o: Self) {
        self.count += o.count;
        self.sum += o.sum;
        self.min = self.min.min(o.min);
        self.max = self.max.max(o.max);
        self.exceedances += o.exceedances;
        for (a, b) in self.histogram.iter_mut().zip(o.histogram) {
            *a += b;
        }
    }
}

const L1_SAMPLES_PER_CHUNK: u64 = 1024;

/// Samples uniform unit vectors and records `|u|_1 / sqrt(N)`.
pub struct L1ConcentrationJob {
    dim: usize,
    samples: u64,
    seed: u64,
}

impl L1ConcentrationJob {
    pub fn new(dim: usize, samples: u64, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        if samples == 0 {
            return Err(invalid("at least one sample is required"));
        }
        Ok(Self { dim, samples, seed })
    }
}

impl Job for L1ConcentrationJob {
    type Tally = L1Tally;
    type Output = L1Report;

    fn chunks(&self) -> u64 {
        chunk_count(self.samples, L1_SAMPLES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> L1Tally {
        let mut rng = rng_for(self.seed, "l1", index);
        let mut t = L1Tally::default();
        let root = sqrt(self.dim as f64);
        for _ in chunk_range(self.samples, L1_SAMPLES_PER_CHUNK, index) {
            let u = haar_unit_vector(self.dim, &mut rng);
            let ratio = u.iter().map(|v| fabs(*v)).sum::<f64>() / root;
            t.count += 1;
            t.sum += ratio;
            t.min = t.min.min(ratio);
            t.max = t.max.max(ratio);
            if ratio >= L1_THRESHOLD {
                t.exceedances += 1;
            }
            let bin = ((ratio * L1_HISTOGRAM_BINS as f64) as usize).min(L1_HISTOGRAM_BINS - 1);
            t.histogram[bin] += 1;
        }
        t
    }

    fn finish(&self, t: L1Tally) -> L1Report {
        L1Report {
            dim: self.dim,
            samples: t.count,
            mean: t.sum / t.count as f64,
            min: t.min,
            max: t.max,
            threshold: L1_THRESHOLD,
            exceedances: t.exceedances,
            histogram: t.histogram,
        }
    }
}

pub fn l1_concentration(dim: usize, samples: u64, seed: u64) -> Result<L1Report> {
    Ok(crate::job::run_sequential(&L1ConcentrationJob::new(dim, samples, seed)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HaarMaxReport {
    pub dim: usize,
    pub mode: SearchMode,
    /// One maximum per draw, in draw order.
    pub values: Vec<f64>,
    pub largest: f64,
    pub mean: f64,
}

/// Searches `max rorr` for independent Haar draws, one draw per chunk.
pub struct HaarMaxJob {
    dim: usize,
    draws: u64,
    mode: SearchMode,
    seed: u64,
}

impl HaarMaxJob {
    pub fn new(dim: usize, draws: u64, mode: SearchMode, seed: u64) -> Result<Self> {
        arity_of(dim)?;
        if mode == SearchMode::Exhaustive && dim > EXHAUSTIVE_MAX_DIM {
            return Err(Error::ArityAboveCap {
                n: dim.trailing_zeros() as usize,
                cap: EXHAUSTIVE_MAX_DIM.trailing_zeros() as usize,
            });
        }
        if let SearchMode::LocalSearch { restarts: 0 } = mode {
            return Err(invalid("local search needs at least one restart"));
        }
        if draws == 0 {
            return Err(invalid("at least one draw is required"));
        }
        Ok(Self {
            dim,
            draws,
            mode,
            seed,
        })
    }
}

impl Job for HaarMaxJob {
    type Tally = Vec<f64>;
    type Output = HaarMaxReport;

    fn chunks(&self) -> u64 {
        self.draws
    }

    fn run_chunk(&self, index: u64) -> Vec<f64> {
        let mut rng = rng_for(self.seed, "haar-max", index);
        let value = sample_haar_orthogonal(self.dim, &mut rng)
            .and_then(|u| max_rorr(&u, self.mode, &mut rng))
            .map_or(f64::NAN, |m| m.value);
        vec![value]
    }

    fn finish(&self, values: Vec<f64>) -> HaarMaxReport {
        let largest = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        HaarMaxReport {
            dim: self.dim,
            mode: self.mode,
            values,
            largest,
            mean,
        }
    }
}
