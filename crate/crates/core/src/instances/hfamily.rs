//! The inner functions `h: F2^{n/2} -> F2` an instance is built from.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng as _, RngCore};

use crate::boolfun::{Sign, TruthTable, DEFAULT_ARITY_CAP};
use crate::error::{invalid, Error, Result};
use crate::f2linalg::BitVector;
use crate::seed::splitmix64;

/// Largest number of monomials a degree-bounded family may carry.
pub const MAX_MONOMIALS: u64 = 1 << 20;

/// Which family `h` is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HFamily {
    /// Deterministic keyed mixer standing in for a uniform function; O(1)
    /// memory at any arity.
    UniformLazy,
    /// Genuinely uniform explicit truth table.
    ExplicitTable,
    /// Uniform polynomial of degree at most `d` over F2.
    DegreePoly(u32),
    /// The toy keyed pseudorandom function.
    ToyPrf,
}

impl fmt::Display for HFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFamily::UniformLazy => f.write_str("uniform"),
            HFamily::ExplicitTable => f.write_str("table"),
            HFamily::DegreePoly(d) => write!(f, "poly:{d}"),
            HFamily::ToyPrf => f.write_str("prf"),
        }
    }
}

impl core::str::FromStr for HFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(HFamily::UniformLazy),
            "table" => Ok(HFamily::ExplicitTable),
            "prf" => Ok(HFamily::ToyPrf),
            _ => match s.strip_prefix("poly:").map(str::parse::<u32>) {
                Some(Ok(d)) => Ok(HFamily::DegreePoly(d)),
                _ => Err(invalid(alloc::format!("unknown h family `{s}`"))),
            },
        }
    }
}

/// A concrete `h`. Evaluations are deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HFunction {
    UniformLazy { arity: usize, seed: u64 },
    /// Bit set at index `u` means `h(u) = 1`.
    Table(TruthTable),
    /// `h(u) = sum over monomials m with m ⊆ u`; each mask lists the
    /// variables of one monomial with coefficient 1.
    Poly {
        arity: usize,
        degree: u32,
        monomials: Vec<BitVector>,
    },
    ToyPrf { arity: usize, key: u64 },
}

/// Folds the words of `u` through the mixer; for inputs of at most 64 bits
/// this is `splitmix64(u)`.
fn fold_input(words: &[u64]) -> u64 {
    words.iter().fold(0, |acc, &w| splitmix64(acc ^ w))
}

/// The toy PRF: bit 0 of `splitmix64(key ^ splitmix64(u))`.
#[inline]
pub fn toy_prf(key: u64, u: u64) -> bool {
    splitmix64(key ^ splitmix64(u)) & 1 == 1
}

fn uniform_key(seed: u64) -> u64 {
    splitmix64(seed)
}

/// `sum_{k <= d} C(m, k)`, saturating.
pub fn monomial_count(arity: usize, degree: u32) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for k in 0..=(degree as u64).min(arity as u64) {
        if k > 0 {
            binom = binom.saturating_mul(arity as u64 - k + 1) / k;
        }
        total = total.saturating_add(binom);
    }
    total
}

fn for_each_subset(arity: usize, max_size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, arity: usize, max: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        f(cur);
        if cur.len() == max {
            return;
        }
        for i in start..arity {
            cur.push(i);
            rec(i + 1, arity, max, cur, f);
            cur.pop();
        }
    }
    rec(0, arity, max_size, &mut Vec::new(), f);
}

impl HFunction {
    pub fn sample<R: RngCore + ?Sized>(family: HFamily, arity: usize, rng: &mut R) -> Result<Self> {
        match family {
            HFamily::UniformLazy => Ok(HFunction::UniformLazy {
                arity,
                seed: rng.next_u64(),
            }),
            HFamily::ToyPrf => Ok(HFunction::ToyPrf {
                arity,
                key: rng.next_u64(),
            }),
            HFamily::ExplicitTable => {
                if arity > DEFAULT_ARITY_CAP {
                    return Err(Error::ArityAboveCap {
                        n: arity,
                        cap: DEFAULT_ARITY_CAP,
                    });
                }
                Ok(HFunction::Table(TruthTable::random(arity, rng)?))
            }
            HFamily::DegreePoly(degree) => {
                if degree as usize > arity {
                    return Err(invalid(alloc::format!(
                        "degree {degree} exceeds h arity {arity}"
                    )));
                }
                let count = monomial_count(arity, degree);
                if count > MAX_MONOMIALS {
                    return Err(invalid(alloc::format!(
                        "{count} monomials exceed the cap of {MAX_MONOMIALS}"
                    )));
                }
                let mut monomials = Vec::new();
                for_each_subset(arity, degree as usize, &mut |vars| {
                    if rng.gen::<bool>() {
                        let mut m = BitVector::zeros(arity);
                        for &v in vars {
                            m.set(v, true);
                        }
                        monomials.push(m);
                    }
                });
                Ok(HFunction::Poly {
                    arity,
                    degree,
                    monomials,
                })
            }
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            HFunction::UniformLazy { arity, .. }
            | HFunction::Poly { arity, .. }
            | HFunction::ToyPrf { arity, .. } => *arity,
            HFunction::Table(t) => t.arity(),
        }
    }

    pub fn family(&self) -> HFamily {
        match self {
            HFunction::UniformLazy { .. } => HFamily::UniformLazy,
            HFunction::Table(_) => HFamily::ExplicitTable,
            HFunction::Poly { degree, .. } => HFamily::DegreePoly(*degree),
            HFunction::ToyPrf { .. } => HFamily::ToyPrf,
        }
    }

    pub fn eval(&self, u: &BitVector) -> Result<bool> {
        if u.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                found: u.len(),
            });
        }
        Ok(match self {
            HFunction::UniformLazy { seed, .. } => {
                splitmix64(uniform_key(*seed) ^ fold_input(u.words())) & 1 == 1
            }
            HFunction::ToyPrf { key, .. } => {
                splitmix64(key ^ fold_input(u.words())) & 1 == 1
            }
            HFunction::Table(t) => {
                let idx = u.index().expect("table arity fits an index");
                t.get(idx).is_minus()
            }
            HFunction::Poly { monomials, .. } => {
                monomials
                    .iter()
                    .filter(|m| m.words().iter().zip(u.words()).all(|(mw, uw)| mw & !uw == 0))
                    .count()
                    % 2
                    == 1
            }
        })
    }

    /// Evaluation at the point with integer encoding `u`; arity must be at
    /// most 64.
    #[inline]
    pub fn eval_u64(&self, u: u64) -> bool {
        debug_assert!(self.arity() <= 64);
        match self {
            HFunction::UniformLazy { seed, .. } => toy_prf(uniform_key(*seed), u),
            HFunction::ToyPrf { key, .. } => toy_prf(*key, u),
            HFunction::Table(t) => t.get(u as usize).is_minus(),
            HFunction::Poly { monomials, .. } => {
                monomials
                    .iter()
                    .filter(|m| m.words().first().map_or(0, |&w| w) & !u == 0)
                    .count()
                    % 2
                    == 1
            }
        }
    }

    /// Explicit table of `h` (bit set means `h = 1`).
    pub fn to_table(&self) -> Result<TruthTable> {
        let arity = self.arity();
        if arity > DEFAULT_ARITY_CAP {
            return Err(Error::ArityAboveCap {
                n: arity,
                cap: DEFAULT_ARITY_CAP,
            });
        }
        TruthTable::from_fn(arity, |u| Sign::from_bit(self.eval_u64(u as u64)))
    }
}
