//! Small statistical helpers for the Monte-Carlo checks.

use libm::{exp, fabs, lgamma, log, sqrt};

/// Significance level used by every sampled check.
pub const SIGNIFICANCE: f64 = 0.001;

/// Width of the binomial band used by sampled checks, in standard deviations.
pub const SIGMA_BAND: f64 = 3.0;

/// Two-sided Hoeffding half-width for a mean of `trials` values in `[0, 1]`
/// at confidence `1 - alpha`.
pub fn hoeffding_half_width(trials: u64, alpha: f64) -> f64 {
    sqrt(log(2.0 / alpha) / (2.0 * trials as f64))
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    sqrt(p * (1.0 - p) / trials as f64)
}

/// True if `observed` lies within `SIGMA_BAND` binomial deviations of `p`.
pub fn within_sigma_band(observed: f64, p: f64, trials: u64) -> bool {
    fabs(observed - p) <= SIGMA_BAND * binomial_sigma(p, trials)
}

/// Pearson statistic of `counts` against the uniform expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Upper tail `P[X >= stat]` of a chi-square variable with `dof` degrees of
/// freedom.
pub fn chi_square_sf(stat: f64, dof: u32) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_q(f64::from(dof) / 2.0, stat / 2.0)
}

/// Regularised upper incomplete gamma function `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if fabs(term) < fabs(sum) * EPS {
            break;
        }
    }
    sum * exp(-x + a * log(x) - lgamma(a))
}

// Modified Lentz evaluation.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < EPS {
            break;
        }
    }
    exp(-x + a * log(x) - lgamma(a)) * h
}
