//! Yes/no instance distributions and point-query oracles.
//!
//! For the standard variant, with `A` uniform invertible, `B = (A^T)^{-1}`,
//! `a` uniform and `b = B^T [B2; B1] a`:
//!
//! ```text
//! f(x) = <A1 x, A2 x> + <x, a> + h(A2 x)
//! g(y) = <B1 y, B2 y> + <y, b> + h(B1 y + B1 a) + <B1 a, B2 a>
//! ```
//!
//! The yes instance is `(chi_f, chi_g)` and the no instance
//! `(chi_f, -chi_g)`, with Forrelation exactly `+1` and `-1`.
//!
//! The sketch variant drops the affine shift and uses `h(A2 x)`, `h(B1 y)`
//! alone on the no side (Forrelation `2^{-n/2}`). The naive variant is the
//! standard one with `a = b = 0`; it is trivially broken by querying both
//! functions at the origin and exists only to show that failure.

mod hfamily;

use alloc::sync::Arc;
use core::fmt;
use core::str::FromStr;

use rand::RngCore;

pub use hfamily::{monomial_count, toy_prf, HFamily, HFunction, MAX_MONOMIALS};

use crate::boolfun::{Sign, TruthTable, DEFAULT_ARITY_CAP};
use crate::error::{invalid, Error, Result};
use crate::f2linalg::{sample_hard_matrices, BitMatrix, BitVector, HardMatrices};
use crate::seed::splitmix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Standard,
    Sketch,
    /// Not safe: distinguishable with two queries.
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn flipped(self) -> Self {
        match self {
            Label::Yes => Label::No,
            Label::No => Label::Yes,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Standard => "standard",
            Variant::Sketch => "sketch",
            Variant::Naive => "naive",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "sketch" => Ok(Variant::Sketch),
            "naive" => Ok(Variant::Naive),
            _ => Err(invalid(alloc::format!("unknown variant `{s}`"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Yes => "yes",
            Label::No => "no",
        })
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yes" => Ok(Label::Yes),
            "no" => Ok(Label::No),
            _ => Err(invalid(alloc::format!("unknown label `{s}`"))),
        }
    }
}

/// Everything that determines one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardParams {
    matrices: HardMatrices,
    h: HFunction,
    variant: Variant,
    label: Label,
    b1_shift: BitVector,
    offset: bool,
}

impl HardParams {
    /// Sketch and naive variants discard the shifts of `matrices`.
    pub fn new(matrices: HardMatrices, h: HFunction, variant: Variant, label: Label) -> Result<Self> {
        let n = matrices.n();
        if h.arity() != n / 2 {
            return Err(Error::FamilyArity {
                expected: n / 2,
                found: h.arity(),
            });
        }
        let matrices = match variant {
            Variant::Standard => matrices,
            Variant::Sketch | Variant::Naive => matrices.without_shift(),
        };
        let shift = matrices.mat_b().mat_vec_unchecked(matrices.shift_a());
        let (b1_shift, b2_shift) = shift.split_halves()?;
        let offset = b1_shift.dot_unchecked(&b2_shift);
        Ok(Self {
            matrices,
            h,
            variant,
            label,
            b1_shift,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.matrices.n()
    }

    pub fn matrices(&self) -> &HardMatrices {
        &self.matrices
    }

    pub fn h(&self) -> &HFunction {
        &self.h
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn with_label(&self, label: Label) -> Self {
        Self {
            label,
            ..self.clone()
        }
    }

    fn check_point(&self, v: &BitVector) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// The point `A2 x` at which `f(x)` consults `h`.
    pub fn h_input_f(&self, x: &BitVector) -> Result<BitVector> {
        self.check_point(x)?;
        Ok(self.matrices.mat_a().mat_vec_unchecked(x).split_halves()?.1)
    }

    /// The point at which `g(y)` consults `h`: `B1 y + B1 a` (just `B1 y`
    /// when the variant has no shift).
    pub fn h_input_g(&self, y: &BitVector) -> Result<BitVector> {
        self.check_point(y)?;
        let mut w1 = self.matrices.mat_b().mat_vec_unchecked(y).split_halves()?.0;
        w1.xor_assign_unchecked(&self.b1_shift);
        Ok(w1)
    }

    pub fn eval_f(&self, x: &BitVector) -> Result<Sign> {
        self.check_point(x)?;
        let (z1, z2) = self.matrices.mat_a().mat_vec_unchecked(x).split_halves()?;
        let quad = z1.dot_unchecked(&z2);
        let hz = self.h.eval(&z2)?;
        let bit = match (self.variant, self.label) {
            (Variant::Sketch, Label::Yes) => quad ^ hz,
            (Variant::Sketch, Label::No) => hz,
            _ => quad ^ x.dot_unchecked(self.matrices.shift_a()) ^ hz,
        };
        Ok(Sign::from_bit(bit))
    }

    pub fn eval_g(&self, y: &BitVector) -> Result<Sign> {
        self.check_point(y)?;
        let (mut w1, w2) = self.matrices.mat_b().mat_vec_unchecked(y).split_halves()?;
        let quad = w1.dot_unchecked(&w2);
        let sign = match self.variant {
            Variant::Sketch => {
                let hw = self.h.eval(&w1)?;
                match self.label {
                    Label::Yes => Sign::from_bit(quad ^ hw),
                    Label::No => Sign::from_bit(hw),
                }
            }
            Variant::Standard | Variant::Naive => {
                let linear = y.dot_unchecked(self.matrices.shift_b());
                w1.xor_assign_unchecked(&self.b1_shift);
                let bit = quad ^ linear ^ self.h.eval(&w1)? ^ self.offset;
                match self.label {
                    Label::Yes => Sign::from_bit(bit),
                    Label::No => -Sign::from_bit(bit),
                }
            }
        };
        Ok(sign)
    }

    /// Explicit truth tables of `chi_f` and `chi_g` (the latter already
    /// carrying the label's sign).
    pub fn materialize(&self) -> Result<(TruthTable, TruthTable)> {
        self.materialize_with_cap(DEFAULT_ARITY_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<(TruthTable, TruthTable)> {
        let n = self.n();
        let cap = cap.min(62);
        if n > cap {
            return Err(Error::ArityAboveCap { n, cap });
        }
        let f = self.tabulate(true)?;
        let g = self.tabulate(false)?;
        self.spot_check(&f, &g)?;
        Ok((f, g))
    }

    // Walks all points in Gray-code order, updating M x one column at a time.
    fn tabulate(&self, is_f: bool) -> Result<TruthTable> {
        let n = self.n();
        let half = n / 2;
        let low_mask = (1u64 << half) - 1;
        let m: &BitMatrix = if is_f {
            self.matrices.mat_a()
        } else {
            self.matrices.mat_b()
        };
        let columns: alloc::vec::Vec<u64> = (0..n)
            .map(|j| (0..n).fold(0u64, |acc, i| acc | (u64::from(m.get(i, j)) << i)))
            .collect();
        let shift = if is_f {
            self.matrices.shift_a()
        } else {
            self.matrices.shift_b()
        };
        let shift = shift.to_u64().expect("n <= 62");
        let b1_shift = self.b1_shift.to_u64().expect("n <= 62");
        let mut table = TruthTable::constant(n, Sign::Plus)?;
        let mut image = 0u64;
        let mut linear = false;
        for i in 0..1u64 << n {
            if i > 0 {
                let j = i.trailing_zeros() as usize;
                image ^= columns[j];
                linear ^= (shift >> j) & 1 == 1;
            }
            let x = i ^ (i >> 1);
            let lo = image & low_mask;
            let hi = image >> half;
            let quad = (lo & hi).count_ones() & 1 == 1;
            let sign = match (is_f, self.variant, self.label) {
                (true, Variant::Sketch, Label::Yes) => Sign::from_bit(quad ^ self.h.eval_u64(hi)),
                (true, Variant::Sketch, Label::No) => Sign::from_bit(self.h.eval_u64(hi)),
                (true, _, _) => Sign::from_bit(quad ^ linear ^ self.h.eval_u64(hi)),
                (false, Variant::Sketch, Label::Yes) => Sign::from_bit(quad ^ self.h.eval_u64(lo)),
                (false, Variant::Sketch, Label::No) => Sign::from_bit(self.h.eval_u64(lo)),
                (false, _, label) => {
                    let bit = quad ^ linear ^ self.h.eval_u64(lo ^ b1_shift) ^ self.offset;
                    match label {
                        Label::Yes => Sign::from_bit(bit),
                        Label::No => -Sign::from_bit(bit),
                    }
                }
            };
            table.set(x as usize, sign);
        }
        Ok(table)
    }

    fn spot_check(&self, f: &TruthTable, g: &TruthTable) -> Result<()> {
        let n = self.n();
        let mask = (1u64 << n) - 1;
        for i in 0..100u64 {
            let x = splitmix64(i ^ 0xF0F0) & mask;
            let point = BitVector::from_u64(n, x);
            if self.eval_f(&point)? != f.get(x as usize) || self.eval_g(&point)? != g.get(x as usize) {
                return Err(Error::Internal(alloc::format!(
                    "materialized table disagrees with point evaluation at {x:#x}"
                )));
            }
        }
        Ok(())
    }
}

/// Draws `(A, B, a, b)` and then `h`; the label does not affect the draw.
pub fn sample_params<R: RngCore + ?Sized>(
    n: usize,
    variant: Variant,
    family: HFamily,
    label: Label,
    rng: &mut R,
) -> Result<HardParams> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddArity(n));
    }
    let matrices = sample_hard_matrices(n, rng)?;
    let h = HFunction::sample(family, n / 2, rng)?;
    HardParams::new(matrices, h, variant, label)
}

/// Point-query access to an instance, counting queries.
///
/// Cloning an oracle shares the parameters and resets the counters.
#[derive(Debug)]
pub struct Oracle {
    params: Arc<HardParams>,
    f_queries: u64,
    g_queries: u64,
}

impl Clone for Oracle {
    fn clone(&self) -> Self {
        Self::new(Arc::clone(&self.params))
    }
}

impl Oracle {
    pub fn new(params: Arc<HardParams>) -> Self {
        Self {
            params,
            f_queries: 0,
            g_queries: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn params(&self) -> &HardParams {
        &self.params
    }

    pub fn query_f(&mut self, x: &BitVector) -> Result<Sign> {
        let v = self.params.eval_f(x)?;
        self.f_queries += 1;
        Ok(v)
    }

    pub fn query_g(&mut self, y: &BitVector) -> Result<Sign> {
        let v = self.params.eval_g(y)?;
        self.g_queries += 1;
        Ok(v)
    }

    pub fn f_queries(&self) -> u64 {
        self.f_queries
    }

    pub fn g_queries(&self) -> u64 {
        self.g_queries
    }

    pub fn total_queries(&self) -> u64 {
        self.f_queries + self.g_queries
    }
}

pub fn sample_instance<R: RngCore + ?Sized>(
    n: usize,
    variant: Variant,
    family: HFamily,
    label: Label,
    rng: &mut R,
) -> Result<Oracle> {
    Ok(Oracle::new(Arc::new(sample_params(n, variant, family, label, rng)?)))
}
