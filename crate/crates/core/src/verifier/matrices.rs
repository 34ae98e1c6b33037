//! Checks that only involve `(A, a)`: marginals of `B1` and `A2`, the rank
//! count, and the two collision lemmas.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::{LemmaReport, Lemma, Mode};
use crate::error::{invalid, Error, Result};
use crate::f2linalg::{full_row_rank_count, random_nonzero, sample_hard_matrices, sample_invertible, BitMatrix, BitVector};
use crate::job::{chunk_count, chunk_range, Counts, Job, Runner};
use crate::seed::rng_for;
use crate::stats::{binomial_sigma, within_sigma_band, SIGMA_BAND};

const MATRICES_PER_CHUNK: u64 = 4096;
const SAMPLES_PER_CHUNK: u64 = 4096;

fn check_even(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddArity(n));
    }
    Ok(())
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ratio(num: u128, den: u128) -> String {
    let g = gcd(num, den).max(1);
    format!("{}/{}", num / g, den / g)
}

fn named(pairs: &[(&str, u64)]) -> Vec<(String, u64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Walks all `n x n` matrices by index, handing each invertible `A` and its
/// `B = (A^T)^{-1}` to `visit`.
fn for_each_invertible(n: usize, range: core::ops::Range<u64>, mut visit: impl FnMut(&BitMatrix, &BitMatrix)) {
    for index in range {
        let a = BitMatrix::from_index(n, n, index);
        if let Ok(b) = a.transpose().invert() {
            visit(&a, &b);
        }
    }
}

fn matrix_space(n: usize) -> u64 {
    1u64 << (n * n)
}

/// Histograms of `B1` and `A2` (indexed by `BitMatrix::to_index`) over all
/// invertible `A`, the last slot holding the number of invertible matrices.
struct MarginalJob {
    n: usize,
}

impl MarginalJob {
    fn new(n: usize) -> Result<Self> {
        if n != 2 && n != 4 {
            return Err(invalid("marginal enumeration needs n = 2 or n = 4"));
        }
        Ok(Self { n })
    }

    fn slots(&self) -> usize {
        1 << (self.n * self.n / 2)
    }
}

impl Job for MarginalJob {
    type Tally = Counts;
    type Output = (Vec<u64>, Vec<u64>, u64);

    fn chunks(&self) -> u64 {
        chunk_count(matrix_space(self.n), MATRICES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> Counts {
        let slots = self.slots();
        let mut counts = Counts::zeros(2 * slots + 1);
        let range = chunk_range(matrix_space(self.n), MATRICES_PER_CHUNK, index);
        for_each_invertible(self.n, range, |a, b| {
            let b1 = b.upper_half().to_index().expect("small matrix") as usize;
            let a2 = a.lower_half().to_index().expect("small matrix") as usize;
            counts.0[b1] += 1;
            counts.0[slots + a2] += 1;
            counts.0[2 * slots] += 1;
        });
        counts
    }

    fn finish(&self, c: Counts) -> Self::Output {
        let slots = self.slots();
        (c.0[..slots].to_vec(), c.0[slots..2 * slots].to_vec(), c.0[2 * slots])
    }
}

fn full_rank_mask(n: usize) -> Vec<bool> {
    (0..1u64 << (n * n / 2))
        .map(|i| BitMatrix::from_index(n / 2, n, i).has_full_row_rank())
        .collect()
}

/// `B1` and `A2` are uniform over full-row-rank `n/2 x n` matrices when `A`
/// is uniform invertible. Exhaustive at `n` in `{2, 4}`.
pub fn verify_marginal_uniformity<R: Runner>(runner: &R, n: usize) -> Result<LemmaReport> {
    let (b1, a2, total) = runner.run(&MarginalJob::new(n)?);
    let mask = full_rank_mask(n);
    let full = mask.iter().filter(|m| **m).count() as u64;
    let per = total / full;
    let mut failures = Vec::new();
    let mut deficient_hits = 0;
    for (name, hist) in [("B1", &b1), ("A2", &a2)] {
        for (i, (&count, &is_full)) in hist.iter().zip(&mask).enumerate() {
            if !is_full {
                deficient_hits += count;
            }
            let want = if is_full { per } else { 0 };
            if count != want && failures.len() < super::MAX_DUMPS {
                failures.push(format!(
                    "{name} = {:?} seen {count} times, expected {want}",
                    BitMatrix::from_index(n / 2, n, i as u64)
                ));
            }
        }
    }
    let flat = total % full == 0 && failures.is_empty();
    Ok(LemmaReport {
        lemma: Lemma::MarginalUniformity,
        n,
        mode: Mode::Exhaustive,
        expected: format!("each of {full} full-row-rank matrices appears {per} times as B1 and as A2, others never"),
        observed: if flat {
            format!("flat over {total} invertible matrices, {deficient_hits} rank-deficient hits")
        } else {
            format!("not flat: {} mismatching entries", failures.len())
        },
        pass: flat,
        counts: named(&[
            ("invertible", total),
            ("full_row_rank", full),
            ("per_matrix", per),
            ("rank_deficient_hits", deficient_hits),
            ("b1_min", b1.iter().zip(&mask).filter(|(_, m)| **m).map(|(c, _)| *c).min().unwrap_or(0)),
            ("b1_max", b1.iter().copied().max().unwrap_or(0)),
            ("a2_min", a2.iter().zip(&mask).filter(|(_, m)| **m).map(|(c, _)| *c).min().unwrap_or(0)),
            ("a2_max", a2.iter().copied().max().unwrap_or(0)),
        ]),
        failures,
    })
}

/// Exact total variation distance between the law of `B1` and the uniform
/// law on all `n/2 x n` matrices, against `(n/2) 2^{-n/2}`.
pub fn verify_total_variation<R: Runner>(runner: &R, n: usize) -> Result<LemmaReport> {
    let (b1, _, total) = runner.run(&MarginalJob::new(n)?);
    let space = b1.len() as u128;
    let total = total as u128;
    // TVD = sum |count/total - 1/space| / 2 = num / (2 * total * space).
    let num: u128 = b1
        .iter()
        .map(|&c| (c as u128 * space).abs_diff(total))
        .sum();
    let den = 2 * total * space;
    let half = n / 2;
    // num/den <= half / 2^half  <=>  num * 2^half <= half * den.
    let pass = num << half <= half as u128 * den;
    Ok(LemmaReport {
        lemma: Lemma::TotalVariation,
        n,
        mode: Mode::Exhaustive,
        expected: format!("TVD <= {half}/{}", 1u64 << half),
        observed: format!("TVD = {}", ratio(num, den)),
        pass,
        counts: named(&[("tvd_num", num as u64), ("tvd_den", den as u64)]),
        failures: Vec::new(),
    })
}

struct RankJob {
    n: usize,
    mode: Mode,
    seed: u64,
}

impl RankJob {
    fn items(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => 1u64 << (self.n * self.n / 2),
            Mode::Sampled { samples } => samples,
        }
    }
}

impl Job for RankJob {
    type Tally = u64;
    type Output = u64;

    fn chunks(&self) -> u64 {
        chunk_count(self.items(), SAMPLES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> u64 {
        let (rows, cols) = (self.n / 2, self.n);
        let range = chunk_range(self.items(), SAMPLES_PER_CHUNK, index);
        match self.mode {
            Mode::Exhaustive => range
                .filter(|&i| BitMatrix::from_index(rows, cols, i).has_full_row_rank())
                .count() as u64,
            Mode::Sampled { .. } => {
                let mut rng = rng_for(self.seed, "rank", index);
                range
                    .filter(|_| BitMatrix::random(rows, cols, &mut rng).has_full_row_rank())
                    .count() as u64
            }
        }
    }

    fn finish(&self, full: u64) -> u64 {
        full
    }
}

/// Fraction of full-row-rank `n/2 x n` matrices: exact count against the
/// product formula, and the lower bound `1 - (n/2) 2^{-n/2}`.
pub fn verify_row_rank_fraction<R: Runner>(runner: &R, n: usize, mode: Mode, seed: u64) -> Result<LemmaReport> {
    check_even(n)?;
    let half = n / 2;
    let formula = full_row_rank_count(half, n).ok_or_else(|| invalid("arity too large for the exact count"))?;
    let space_bits = (half * n) as u32;
    let bound = 1.0 - half as f64 / (1u64 << half) as f64;
    let p = formula as f64 / libm::exp2(f64::from(space_bits));
    match mode {
        Mode::Exhaustive => {
            if n > 6 {
                return Err(invalid("exhaustive rank count needs n <= 6"));
            }
        }
        Mode::Sampled { samples: 0 } => return Err(invalid("at least one sample is required")),
        Mode::Sampled { .. } => {}
    }
    let job = RankJob { n, mode, seed };
    let full = runner.run(&job);
    let items = job.items();
    let (observed, pass) = match mode {
        Mode::Exhaustive => {
            let total = 1u128 << space_bits;
            let full = full as u128;
            // full / total >= 1 - half / 2^half  <=>  full * 2^half >= (2^half - half) * total.
            let meets_bound = full << half >= ((1u128 << half) - half as u128) * total;
            (format!("{} exactly", ratio(full, total)), full == formula && meets_bound)
        }
        Mode::Sampled { samples } => {
            let freq = full as f64 / samples as f64;
            let sigma = binomial_sigma(p, samples);
            let pass = within_sigma_band(freq, p, samples) && freq >= bound - SIGMA_BAND * sigma;
            (format!("{freq:.6} over {samples} samples (3 sigma = {:.2e})", SIGMA_BAND * sigma), pass)
        }
    };
    Ok(LemmaReport {
        lemma: Lemma::RowRankFraction,
        n,
        mode,
        expected: format!("{} = {p:.7} >= {bound}", ratio(formula, 1u128 << space_bits)),
        observed,
        pass,
        counts: named(&[("full_row_rank", full), ("checked", items)]),
        failures: Vec::new(),
    })
}

/// Ten `(x, y)` pairs by default: `(0, 0)`, `(0, r)`, `(r, 0)` and random
/// pairs. At `n = 2` every one of the 16 pairs.
pub fn default_collision_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(BitVector, BitVector)>> {
    check_even(n)?;
    if n == 2 {
        return Ok((0..16u64)
            .map(|i| (BitVector::from_u64(2, i & 3), BitVector::from_u64(2, i >> 2)))
            .collect());
    }
    let mut rng = rng_for(seed, "collision-pairs", 0);
    let mut pairs = vec![(BitVector::zeros(n), BitVector::zeros(n))];
    if count > 1 {
        pairs.push((BitVector::zeros(n), random_nonzero(n, &mut rng)));
    }
    if count > 2 {
        pairs.push((random_nonzero(n, &mut rng), BitVector::zeros(n)));
    }
    while pairs.len() < count {
        pairs.push((BitVector::random(n, &mut rng), BitVector::random(n, &mut rng)));
    }
    Ok(pairs)
}

struct CollisionJob<'a> {
    n: usize,
    pairs: &'a [(BitVector, BitVector)],
    mode: Mode,
    seed: u64,
}

impl CollisionJob<'_> {
    fn items(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => matrix_space(self.n),
            Mode::Sampled { samples } => samples,
        }
    }

    fn count(&self, a2: &BitMatrix, b1: &BitMatrix, shift: &BitVector, counts: &mut [u64]) {
        let b1a = b1.mat_vec_unchecked(shift);
        for (slot, (x, y)) in counts.iter_mut().zip(self.pairs) {
            let mut rhs = b1.mat_vec_unchecked(y);
            rhs.xor_assign_unchecked(&b1a);
            if a2.mat_vec_unchecked(x) == rhs {
                *slot += 1;
            }
        }
    }
}

impl Job for CollisionJob<'_> {
    /// Per-pair hits, then the number of settings.
    type Tally = Counts;
    type Output = Counts;

    fn chunks(&self) -> u64 {
        chunk_count(self.items(), SAMPLES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> Counts {
        let k = self.pairs.len();
        let mut counts = Counts::zeros(k + 1);
        let range = chunk_range(self.items(), SAMPLES_PER_CHUNK, index);
        match self.mode {
            Mode::Exhaustive => for_each_invertible(self.n, range, |a, b| {
                let (a2, b1) = (a.lower_half(), b.upper_half());
                for shift in 0..1u64 << self.n {
                    self.count(&a2, &b1, &BitVector::from_u64(self.n, shift), &mut counts.0[..k]);
                    counts.0[k] += 1;
                }
            }),
            Mode::Sampled { .. } => {
                let mut rng = rng_for(self.seed, "collision", index);
                for _ in range {
                    let m = sample_hard_matrices(self.n, &mut rng).expect("even arity checked");
                    let (a2, b1) = (m.mat_a().lower_half(), m.mat_b().upper_half());
                    self.count(&a2, &b1, m.shift_a(), &mut counts.0[..k]);
                    counts.0[k] += 1;
                }
            }
        }
        counts
    }

    fn finish(&self, c: Counts) -> Counts {
        c
    }
}

/// `Pr[A2 x = B1 y + B1 a] = 2^{-n/2}` for each given pair. Exhaustive over
/// all `(A, a)` for `n <= 4`.
pub fn verify_collision_lemma<R: Runner>(
    runner: &R,
    n: usize,
    pairs: &[(BitVector, BitVector)],
    mode: Mode,
    seed: u64,
) -> Result<LemmaReport> {
    check_even(n)?;
    if pairs.is_empty() {
        return Err(invalid("at least one (x, y) pair is required"));
    }
    for (x, y) in pairs {
        for v in [x, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
    }
    match mode {
        Mode::Exhaustive if n > 4 => return Err(invalid("exhaustive collision check needs n <= 4")),
        Mode::Sampled { samples: 0 } => return Err(invalid("at least one sample is required")),
        _ => {}
    }
    let half = n / 2;
    let counts = runner.run(&CollisionJob { n, pairs, mode, seed }).0;
    let (hits, total) = (&counts[..pairs.len()], counts[pairs.len()]);
    let p = 1.0 / (1u64 << half) as f64;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for ((x, y), &h) in pairs.iter().zip(hits) {
        let ok = match mode {
            Mode::Exhaustive => (h as u128) << half == total as u128,
            Mode::Sampled { .. } => within_sigma_band(h as f64 / total as f64, p, total),
        };
        worst = worst.max(libm::fabs(h as f64 / total as f64 - p));
        if !ok && failures.len() < super::MAX_DUMPS {
            failures.push(format!("x = {x:?}, y = {y:?}: {h} of {total}"));
        }
    }
    let mut named_counts = named(&[("settings", total)]);
    for (i, h) in hits.iter().enumerate() {
        named_counts.push((format!("pair_{i}"), *h));
    }
    Ok(LemmaReport {
        lemma: Lemma::Collision,
        n,
        mode,
        expected: format!("Pr[A2 x = B1 y + B1 a] = 1/{} for each of {} pairs", 1u64 << half, pairs.len()),
        observed: match mode {
            Mode::Exhaustive => format!(
                "{} of {} pairs exact over {total} settings",
                pairs.len() - failures.len(),
                pairs.len()
            ),
            Mode::Sampled { .. } => format!("largest deviation {worst:.2e} over {total} samples"),
        },
        pass: failures.is_empty(),
        counts: named_counts,
        failures,
    })
}

struct PairwiseJob<'a> {
    n: usize,
    diffs: &'a [BitVector],
    mode: Mode,
    seed: u64,
}

impl PairwiseJob<'_> {
    fn items(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => matrix_space(self.n),
            Mode::Sampled { samples } => samples,
        }
    }

    fn count(&self, a: &BitMatrix, b: &BitMatrix, counts: &mut [u64]) {
        let (a2, b1) = (a.lower_half(), b.upper_half());
        let k = self.diffs.len();
        for (i, d) in self.diffs.iter().enumerate() {
            counts[i] += u64::from(a2.mat_vec_unchecked(d).is_zero());
            counts[k + i] += u64::from(b1.mat_vec_unchecked(d).is_zero());
        }
        counts[2 * k] += 1;
    }
}

impl Job for PairwiseJob<'_> {
    /// A2 hits per difference, B1 hits per difference, then the total.
    type Tally = Counts;
    type Output = Counts;

    fn chunks(&self) -> u64 {
        chunk_count(self.items(), SAMPLES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> Counts {
        let mut counts = Counts::zeros(2 * self.diffs.len() + 1);
        let range = chunk_range(self.items(), SAMPLES_PER_CHUNK, index);
        match self.mode {
            Mode::Exhaustive => for_each_invertible(self.n, range, |a, b| self.count(a, b, &mut counts.0)),
            Mode::Sampled { .. } => {
                let mut rng = rng_for(self.seed, "pairwise", index);
                for _ in range {
                    let a = sample_invertible(self.n, &mut rng);
                    let b = a.transpose().invert().expect("sampled matrix is invertible");
                    self.count(&a, &b, &mut counts.0);
                }
            }
        }
        counts
    }

    fn finish(&self, c: Counts) -> Counts {
        c
    }
}

fn sample_differences<Rg: RngCore + ?Sized>(n: usize, count: usize, rng: &mut Rg) -> Vec<BitVector> {
    (0..count).map(|_| random_nonzero(n, rng)).collect()
}

/// `Pr[A2 x = A2 x']` and `Pr[B1 y = B1 y']` for distinct inputs, against
/// `(n/2 + 1) 2^{-n/2}`. Both depend only on the difference, so the
/// exhaustive mode covers every nonzero difference.
pub fn verify_pairwise_collisions<R: Runner>(runner: &R, n: usize, mode: Mode, seed: u64) -> Result<LemmaReport> {
    check_even(n)?;
    let diffs = match mode {
        Mode::Exhaustive if n > 4 => return Err(invalid("exhaustive pairwise check needs n <= 4")),
        Mode::Exhaustive => (1..1u64 << n).map(|d| BitVector::from_u64(n, d)).collect(),
        Mode::Sampled { samples: 0 } => return Err(invalid("at least one sample is required")),
        Mode::Sampled { .. } => sample_differences(n, 8, &mut rng_for(seed, "pairwise-diffs", 0)),
    };
    let half = n / 2;
    let counts = runner.run(&PairwiseJob { n, diffs: &diffs, mode, seed }).0;
    let k = diffs.len();
    let total = counts[2 * k];
    let bound = (half + 1) as f64 / (1u64 << half) as f64;
    let mut failures = Vec::new();
    let mut largest = 0u64;
    for (i, d) in diffs.iter().enumerate() {
        for (name, hits) in [("A2", counts[i]), ("B1", counts[k + i])] {
            largest = largest.max(hits);
            let ok = match mode {
                Mode::Exhaustive => (hits as u128) << half <= (half as u128 + 1) * total as u128,
                Mode::Sampled { samples } => {
                    hits as f64 / total as f64 <= bound + SIGMA_BAND * binomial_sigma(bound.min(1.0), samples)
                }
            };
            if !ok && failures.len() < super::MAX_DUMPS {
                failures.push(format!("{name} d = {d:?}: {hits} of {total}"));
            }
        }
    }
    Ok(LemmaReport {
        lemma: Lemma::PairwiseCollisions,
        n,
        mode,
        expected: format!("every probability <= {}/{}", half + 1, 1u64 << half),
        observed: format!(
            "largest {} over {} differences",
            ratio(largest as u128, total as u128),
            k
        ),
        pass: failures.is_empty(),
        counts: named(&[("settings", total), ("differences", k as u64), ("largest_hits", largest)]),
        failures,
    })
}
