//! The shipped classical strategies.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{QueryAccess, Strategy};
use crate::boolfun::{forrelation, Dyadic, Sign, TruthTable};
use crate::error::Result;
use crate::f2linalg::{random_nonzero, BitVector};
use crate::instances::Label;
use crate::Rng;

/// Largest arity at which [`FullRead`] tabulates the functions.
pub const FULL_READ_MAX_ARITY: usize = 20;

fn coin(rng: &mut Rng) -> Label {
    if rng.gen::<bool>() {
        Label::Yes
    } else {
        Label::No
    }
}

fn vote(total: i64, rng: &mut Rng) -> Label {
    match total.signum() {
        1 => Label::Yes,
        -1 => Label::No,
        _ => coin(rng),
    }
}

/// Queries `f(0)` and `g(0)` and answers yes iff they agree. Guesses with
/// fewer than two queries available.
#[derive(Clone, Copy, Debug, Default)]
pub struct OriginProbe;

impl Strategy for OriginProbe {
    fn name(&self) -> &str {
        "origin-probe"
    }

    fn decide(&self, access: &mut dyn QueryAccess, rng: &mut Rng) -> Result<Label> {
        if access.remaining() < 2 {
            return Ok(coin(rng));
        }
        let zero = BitVector::zeros(access.arity());
        let product = access.query_f(&zero)? * access.query_g(&zero)?;
        Ok(if product == Sign::Plus {
            Label::Yes
        } else {
            Label::No
        })
    }
}

/// Spends the budget on random pairs `(x, y)`, averages
/// `f(x) g(y) (-1)^<x,y>` (an unbiased estimate of `2^{-n/2} forr`) and
/// thresholds at zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomCorrelator;

impl Strategy for RandomCorrelator {
    fn name(&self) -> &str {
        "random-correlator"
    }

    fn decide(&self, access: &mut dyn QueryAccess, rng: &mut Rng) -> Result<Label> {
        let n = access.arity();
        let mut total = 0i64;
        for _ in 0..access.remaining() / 2 {
            let x = BitVector::random(n, rng);
            let y = BitVector::random(n, rng);
            let mut term = access.query_f(&x)? * access.query_g(&y)?;
            if x.dot_unchecked(&y) {
                term = -term;
            }
            total += term.to_i64();
        }
        Ok(vote(total, rng))
    }
}

/// Probes `f` and `g` at common points (the origin first, then random
/// nonzero points). Wherever `f` and `g` consult `h` at the same input, the
/// product `f(p) g(p)` leans towards the label; the strategy votes on the
/// pattern of products.
#[derive(Clone, Copy, Debug, Default)]
pub struct CollisionHunter;

impl Strategy for CollisionHunter {
    fn name(&self) -> &str {
        "collision-hunter"
    }

    fn decide(&self, access: &mut dyn QueryAccess, rng: &mut Rng) -> Result<Label> {
        let n = access.arity();
        let probes = access.remaining() / 2;
        let mut seen: Vec<BitVector> = Vec::new();
        let mut total = 0i64;
        for i in 0..probes {
            let p = if i == 0 {
                BitVector::zeros(n)
            } else {
                let mut p = random_nonzero(n, rng);
                // Distinct points where the space allows it.
                let mut tries = 0;
                while seen.contains(&p) && tries < 16 {
                    p = random_nonzero(n, rng);
                    tries += 1;
                }
                p
            };
            total += (access.query_f(&p)? * access.query_g(&p)?).to_i64();
            seen.push(p);
        }
        Ok(vote(total, rng))
    }
}

/// Reads both truth tables completely (`2^{n+1}` queries) and decides from
/// the exact Forrelation. Guesses if the budget does not cover the tables.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullRead;

impl Strategy for FullRead {
    fn name(&self) -> &str {
        "full-read"
    }

    fn decide(&self, access: &mut dyn QueryAccess, rng: &mut Rng) -> Result<Label> {
        let n = access.arity();
        if n > FULL_READ_MAX_ARITY || access.remaining() < 2u64 << n {
            return Ok(coin(rng));
        }
        let mut f = TruthTable::constant(n, Sign::Plus)?;
        let mut g = TruthTable::constant(n, Sign::Plus)?;
        for x in 0..1usize << n {
            let p = BitVector::from_u64(n, x as u64);
            f.set(x, access.query_f(&p)?);
            g.set(x, access.query_g(&p)?);
        }
        let value = forrelation(&f, &g)?;
        Ok(if value > Dyadic::ZERO {
            Label::Yes
        } else if value < Dyadic::ZERO {
            Label::No
        } else {
            coin(rng)
        })
    }
}

pub fn builtin_strategies() -> Vec<Box<dyn Strategy>> {
    alloc::vec![
        Box::new(OriginProbe),
        Box::new(RandomCorrelator),
        Box::new(CollisionHunter),
        Box::new(FullRead),
    ]
}

pub fn strategy_by_name(name: &str) -> Option<Box<dyn Strategy>> {
    builtin_strategies().into_iter().find(|s| s.name() == name)
}
