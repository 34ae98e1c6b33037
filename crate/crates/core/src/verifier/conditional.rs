//! Query outcomes on a fixed query set are uniform once the implicit
//! h-inputs are distinct.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{LemmaReport, Lemma, Mode};
use crate::error::{invalid, Error, Result};
use crate::f2linalg::BitVector;
use crate::instances::{sample_params, HFamily, HardParams, Label, Variant};
use crate::job::{chunk_count, chunk_range, Counts, Job, Runner};
use crate::seed::rng_for;
use crate::stats::{chi_square_sf, chi_square_uniform, within_sigma_band, SIGNIFICANCE};

const TRIALS_PER_CHUNK: u64 = 2048;

/// Largest query set: the outcome histogram has `2^ell` cells.
pub const MAX_QUERIES: usize = 16;

/// `(k, ell)` used when not given: `ell = min(4, 2^{n/2})`, half of the
/// queries to `f`.
pub fn default_query_shape(n: usize) -> (usize, usize) {
    let ell = if n / 2 >= 2 { 4 } else { 1usize << (n / 2) };
    (ell / 2, ell)
}

fn distinct_points(n: usize, count: usize, rng: &mut crate::Rng) -> Vec<BitVector> {
    let mut out: Vec<BitVector> = Vec::with_capacity(count);
    while out.len() < count {
        let p = BitVector::random(n, rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub struct ConditionalJob {
    n: usize,
    xs: Vec<BitVector>,
    ys: Vec<BitVector>,
    trials: u64,
    seed: u64,
}

impl ConditionalJob {
    /// `k` distinct queries to `f` and `ell - k` distinct queries to `g`,
    /// drawn once from the seed.
    pub fn new(n: usize, k: usize, ell: usize, trials: u64, seed: u64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddArity(n));
        }
        if ell == 0 || ell > MAX_QUERIES || k > ell {
            return Err(invalid(format!("need 0 <= k <= ell and 1 <= ell <= {MAX_QUERIES}")));
        }
        if n < 63 && (k.max(ell - k) as u64) > 1u64 << n {
            return Err(invalid("not enough distinct points for the query set"));
        }
        if trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        let mut rng = rng_for(seed, "conditional-queries", 0);
        let xs = distinct_points(n, k, &mut rng);
        let ys = distinct_points(n, ell - k, &mut rng);
        Ok(Self { n, xs, ys, trials, seed })
    }

    pub fn with_queries(n: usize, xs: Vec<BitVector>, ys: Vec<BitVector>, trials: u64, seed: u64) -> Result<Self> {
        let mut job = Self::new(n, 0, 1, trials, seed)?;
        let ell = xs.len() + ys.len();
        if ell == 0 || ell > MAX_QUERIES {
            return Err(invalid(format!("need between 1 and {MAX_QUERIES} queries")));
        }
        for v in xs.iter().chain(&ys) {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        job.xs = xs;
        job.ys = ys;
        Ok(job)
    }

    fn ell(&self) -> usize {
        self.xs.len() + self.ys.len()
    }

    /// Outcome pattern if the implicit h-inputs are pairwise distinct.
    fn outcome(&self, p: &HardParams) -> Result<Option<usize>> {
        let mut inputs = Vec::with_capacity(self.ell());
        for x in &self.xs {
            inputs.push(p.h_input_f(x)?);
        }
        for y in &self.ys {
            inputs.push(p.h_input_g(y)?);
        }
        for i in 0..inputs.len() {
            if inputs[i + 1..].contains(&inputs[i]) {
                return Ok(None);
            }
        }
        let mut pattern = 0usize;
        for (i, x) in self.xs.iter().enumerate() {
            pattern |= usize::from(p.eval_f(x)?.is_minus()) << i;
        }
        for (j, y) in self.ys.iter().enumerate() {
            pattern |= usize::from(p.eval_g(y)?.is_minus()) << (self.xs.len() + j);
        }
        Ok(Some(pattern))
    }
}

impl Job for ConditionalJob {
    /// One cell per outcome pattern, then the count of trials outside E.
    type Tally = Counts;
    type Output = LemmaReport;

    fn chunks(&self) -> u64 {
        chunk_count(self.trials, TRIALS_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> Counts {
        let cells = 1usize << self.ell();
        let mut counts = Counts::zeros(cells + 1);
        let mut rng = rng_for(self.seed, "conditional", index);
        for t in chunk_range(self.trials, TRIALS_PER_CHUNK, index) {
            let label = if t % 2 == 0 { Label::Yes } else { Label::No };
            let p = sample_params(self.n, Variant::Standard, HFamily::ExplicitTable, label, &mut rng)
                .expect("parameters validated");
            match self.outcome(&p).expect("query points validated") {
                Some(pattern) => counts.0[pattern] += 1,
                None => counts.0[cells] += 1,
            }
        }
        counts
    }

    fn finish(&self, c: Counts) -> LemmaReport {
        let ell = self.ell();
        let cells = 1usize << ell;
        let patterns = &c.0[..cells];
        let outside = c.0[cells];
        let inside: u64 = patterns.iter().sum();
        let bound = 3.0 * (ell * ell * self.n) as f64 / libm::exp2((self.n / 2) as f64);
        let outside_freq = outside as f64 / self.trials as f64;
        let stat = chi_square_uniform(patterns);
        let p_value = if inside > 0 {
            chi_square_sf(stat, (cells - 1) as u32)
        } else {
            0.0
        };
        let mut pass = inside > 0 && outside_freq <= bound && p_value >= SIGNIFICANCE;
        if ell == 1 && inside > 0 {
            pass &= within_sigma_band(patterns[0] as f64 / inside as f64, 0.5, inside);
        }
        let mut counts = alloc::vec![
            ("trials".to_string(), self.trials),
            ("event_e".to_string(), inside),
            ("not_e".to_string(), outside),
        ];
        for (i, c) in patterns.iter().enumerate() {
            counts.push((format!("pattern_{i:0ell$b}"), *c));
        }
        LemmaReport {
            lemma: Lemma::ConditionalUniformity,
            n: self.n,
            mode: Mode::Sampled { samples: self.trials },
            expected: format!(
                "given E, {cells} patterns uniform (chi-square p >= {SIGNIFICANCE}); Pr[not E] <= {bound:.4}"
            ),
            observed: format!(
                "k = {}, ell = {ell}: Pr[not E] = {outside_freq:.5}, chi-square {stat:.3} on {} dof, p = {p_value:.4}",
                self.xs.len(),
                cells - 1
            ),
            pass,
            counts,
            failures: Vec::new(),
        }
    }
}

pub fn verify_conditional_uniformity<R: Runner>(
    runner: &R,
    n: usize,
    k: usize,
    ell: usize,
    trials: u64,
    seed: u64,
) -> Result<LemmaReport> {
    Ok(runner.run(&ConditionalJob::new(n, k, ell, trials, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::Sequential;

    #[test]
    fn default_shapes() {
        assert_eq!(default_query_shape(2), (1, 2));
        assert_eq!(default_query_shape(4), (2, 4));
        assert_eq!(default_query_shape(8), (2, 4));
    }

    #[test]
    fn single_query_is_a_fair_coin() {
        for k in [0usize, 1] {
            let r = verify_conditional_uniformity(&Sequential, 8, k, 1, 20_000, 5).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.count("not_e"), Some(0));
        }
    }

    #[test]
    fn four_queries_at_n8() {
        let r = verify_conditional_uniformity(&Sequential, 8, 2, 4, 20_000, 6).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.count("trials"), Some(20_000));
        assert_eq!(r.count("event_e").unwrap() + r.count("not_e").unwrap(), 20_000);
    }

    #[test]
    fn repeated_f_queries_never_satisfy_e() {
        let x = BitVector::from_u64(4, 3);
        let job = ConditionalJob::with_queries(4, alloc::vec![x.clone(), x], Vec::new(), 100, 0).unwrap();
        let r = crate::job::run_sequential(&job);
        assert_eq!(r.count("event_e"), Some(0));
        assert!(!r.pass);
    }

    #[test]
    fn invalid_shapes() {
        assert!(ConditionalJob::new(8, 3, 2, 10, 0).is_err());
        assert!(ConditionalJob::new(8, 0, 0, 10, 0).is_err());
        assert!(ConditionalJob::new(8, 0, 17, 10, 0).is_err());
        assert!(ConditionalJob::new(2, 0, 5, 10, 0).is_err());
        assert!(ConditionalJob::new(7, 1, 2, 10, 0).is_err());
    }
}
