//! ±1-valued Boolean functions, their integer Walsh-Hadamard spectra and
//! exact Forrelation.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg};

use rand::RngCore;

use crate::error::{Error, Result};

/// Default largest arity for which explicit tables and spectra are built.
pub const DEFAULT_ARITY_CAP: usize = 26;

/// A value in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^bit`.
    #[inline]
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    #[inline]
    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    #[inline]
    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.to_i64() as f64
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::from_bit(!self.is_minus())
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self.is_minus() ^ rhs.is_minus())
    }
}

/// Truth table of `chi_f = (-1)^f` on `n` bits, one bit per point
/// (bit set means `-1`). Point `x` has the index whose bit `i` is `x_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    fn check_arity(n: usize) -> Result<()> {
        // Hard limit of the packed representation; the configurable cap is
        // enforced by callers that allocate spectra.
        if n >= usize::BITS as usize - 1 {
            return Err(Error::ArityAboveCap {
                n,
                cap: usize::BITS as usize - 2,
            });
        }
        Ok(())
    }

    pub fn constant(n: usize, sign: Sign) -> Result<Self> {
        Self::check_arity(n)?;
        let len = 1usize << n;
        let fill = if sign.is_minus() { u64::MAX } else { 0 };
        let mut t = Self {
            n,
            bits: vec![fill; len.div_ceil(64)],
        };
        t.clear_tail();
        Ok(t)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> Sign) -> Result<Self> {
        let mut t = Self::constant(n, Sign::Plus)?;
        for x in 0..t.len() {
            if f(x).is_minus() {
                t.bits[x / 64] |= 1 << (x % 64);
            }
        }
        Ok(t)
    }

    /// Table from `±1` integers; any other value is rejected.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let n = signs.len().trailing_zeros() as usize;
        if signs.is_empty() || signs.len() != 1 << n {
            return Err(Error::InvalidParameter(alloc::format!(
                "table length {} is not a power of two",
                signs.len()
            )));
        }
        let mut bad = None;
        let t = Self::from_fn(n, |x| match signs[x] {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            v => {
                bad = Some(v);
                Sign::Plus
            }
        })?;
        match bad {
            Some(v) => Err(Error::InvalidParameter(alloc::format!("value {v} is not ±1"))),
            None => Ok(t),
        }
    }

    /// Table from packed words (bit set means `-1`).
    pub fn from_words(n: usize, words: Vec<u64>) -> Result<Self> {
        Self::check_arity(n)?;
        let len = 1usize << n;
        if words.len() != len.div_ceil(64) {
            return Err(Error::DimensionMismatch {
                expected: len.div_ceil(64),
                found: words.len(),
            });
        }
        let mut t = Self { n, bits: words };
        let before = t.bits.clone();
        t.clear_tail();
        if t.bits != before {
            return Err(Error::InvalidParameter("bits set beyond table length".into()));
        }
        Ok(t)
    }

    pub fn random<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut t = Self::constant(n, Sign::Plus)?;
        for w in &mut t.bits {
            *w = rng.next_u64();
        }
        t.clear_tail();
        Ok(t)
    }

    fn clear_tail(&mut self) {
        let len = 1usize << self.n;
        if len % 64 != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    /// Number of points, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize) -> Sign {
        assert!(x < self.len(), "point {x} out of range");
        Sign::from_bit((self.bits[x / 64] >> (x % 64)) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, x: usize, value: Sign) {
        assert!(x < self.len(), "point {x} out of range");
        let bit = 1u64 << (x % 64);
        if value.is_minus() {
            self.bits[x / 64] |= bit;
        } else {
            self.bits[x / 64] &= !bit;
        }
    }

    pub fn negated(&self) -> Self {
        let mut t = self.clone();
        for w in &mut t.bits {
            *w = !*w;
        }
        t.clear_tail();
        t
    }

    pub fn signs(&self) -> impl Iterator<Item = Sign> + '_ {
        (0..self.len()).map(move |x| self.get(x))
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, ", self.n)?;
        for s in self.signs().take(64) {
            f.write_str(if s.is_minus() { "-" } else { "+" })?;
        }
        if self.len() > 64 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

/// Unnormalised spectrum: `coeffs[y] = sum_x chi(x) (-1)^<x,y>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<i64>,
}

impl Spectrum {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<i64> {
        self.coeffs
    }

    pub fn sum_of_squares(&self) -> i128 {
        self.coeffs.iter().map(|&c| i128::from(c) * i128::from(c)).sum()
    }

    /// `2^{-3n/2} sum_y coeffs[y] g(y)`, the Forrelation of the transformed
    /// table with `g`.
    pub fn correlate(&self, g: &TruthTable) -> Result<Dyadic> {
        if g.arity() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.arity(),
            });
        }
        if self.n % 2 != 0 {
            return Err(Error::OddArity(self.n));
        }
        let sum: i64 = self
            .coeffs
            .iter()
            .zip(g.signs())
            .map(|(&c, s)| if s.is_minus() { -c } else { c })
            .sum();
        Ok(Dyadic::new(sum, (3 * self.n / 2) as u32))
    }
}

/// In-place unnormalised Walsh-Hadamard butterfly. Length must be a power of
/// two.
pub fn butterfly(data: &mut [i64]) {
    assert!(data.len().is_power_of_two());
    let mut half = 1;
    while half < data.len() {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        half *= 2;
    }
}

pub fn wht(t: &TruthTable) -> Result<Spectrum> {
    wht_with_cap(t, DEFAULT_ARITY_CAP)
}

pub fn wht_with_cap(t: &TruthTable, cap: usize) -> Result<Spectrum> {
    if t.arity() > cap {
        return Err(Error::ArityAboveCap { n: t.arity(), cap });
    }
    let mut coeffs: Vec<i64> = t.signs().map(Sign::to_i64).collect();
    butterfly(&mut coeffs);
    Ok(Spectrum { n: t.arity(), coeffs })
}

/// `forr(f, g) = 2^{-3n/2} sum_{x,y} f(x) g(y) (-1)^<x,y>`, exactly.
pub fn forrelation(f: &TruthTable, g: &TruthTable) -> Result<Dyadic> {
    if f.arity() != g.arity() {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            found: g.arity(),
        });
    }
    if f.arity() % 2 != 0 {
        return Err(Error::OddArity(f.arity()));
    }
    wht(f)?.correlate(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bentness {
    Bent,
    NotBent,
    /// Bent functions only exist in even arity.
    OddArity,
}

pub fn bentness(t: &TruthTable) -> Result<Bentness> {
    if t.arity() % 2 != 0 {
        return Ok(Bentness::OddArity);
    }
    Ok(spectrum_bentness(&wht(t)?))
}

pub fn spectrum_bentness(s: &Spectrum) -> Bentness {
    if s.arity() % 2 != 0 {
        return Bentness::OddArity;
    }
    let flat = 1i64 << (s.arity() / 2);
    if s.coeffs().iter().all(|c| c.abs() == flat) {
        Bentness::Bent
    } else {
        Bentness::NotBent
    }
}

/// True iff every unnormalised coefficient is `±2^{n/2}`. Odd arity is
/// never bent.
pub fn is_bent(t: &TruthTable) -> bool {
    matches!(bentness(t), Ok(Bentness::Bent))
}

/// The dual `g(y) = coeffs[y] / 2^{n/2}` of a bent function, the unique `g`
/// with `forr(f, g) = 1`.
pub fn dual_from_bent(f: &TruthTable) -> Result<TruthTable> {
    let s = wht(f)?;
    if spectrum_bentness(&s) != Bentness::Bent {
        return Err(Error::NotBent);
    }
    TruthTable::from_fn(f.arity(), |y| Sign::from_bit(s.coeffs()[y] < 0))
}

/// Exact rational `num / 2^exp` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: i64, exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let shift = num.trailing_zeros().min(exp);
        Self {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    pub fn integer(v: i64) -> Self {
        Self::new(v, 0)
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn exp(self) -> u32 {
        self.exp
    }

    /// `2^exp`, when representable.
    pub fn denominator(self) -> Option<u64> {
        1u64.checked_shl(self.exp)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / libm::exp2(f64::from(self.exp))
    }

    pub fn half(self) -> Self {
        Self::new(self.num, self.exp + 1)
    }

    fn aligned(self, other: Self) -> (i128, i128, u32) {
        let exp = self.exp.max(other.exp);
        let a = i128::from(self.num) << (exp - self.exp);
        let b = i128::from(other.num) << (exp - other.exp);
        (a, b, exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, exp) = self.aligned(rhs);
        let sum = a + b;
        if sum == 0 {
            return Dyadic::ZERO;
        }
        let shift = (sum.trailing_zeros()).min(exp);
        let num = i64::try_from(sum >> shift).expect("dyadic numerator overflow");
        Dyadic::new(num, exp - shift)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    /// `num/den`, e.g. `1/1` or `-3/8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.denominator() {
            Some(d) => write!(f, "{}/{}", self.num, d),
            None => write!(f, "{}/2^{}", self.num, self.exp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn table(signs: &[i8]) -> TruthTable {
        TruthTable::from_signs(signs).unwrap()
    }

    fn inner_product_2() -> TruthTable {
        table(&[1, 1, 1, -1])
    }

    // Independent oracle: the double sum straight from the definition.
    fn brute_forrelation(f: &TruthTable, g: &TruthTable) -> Dyadic {
        let n = f.arity();
        let mut sum = 0i64;
        for x in 0..f.len() {
            for y in 0..g.len() {
                let parity = (x & y).count_ones() % 2 == 1;
                let term = f.get(x).to_i64() * g.get(y).to_i64();
                sum += if parity { -term } else { term };
            }
        }
        Dyadic::new(sum, (3 * n / 2) as u32)
    }

    #[test]
    fn wht_examples() {
        assert_eq!(wht(&table(&[1, -1])).unwrap().coeffs(), &[0, 2]);
        assert_eq!(
            wht(&TruthTable::constant(2, Sign::Plus).unwrap()).unwrap().coeffs(),
            &[4, 0, 0, 0]
        );
        assert_eq!(wht(&inner_product_2()).unwrap().coeffs(), &[2, 2, 2, -2]);
    }

    #[test]
    fn wht_cap() {
        let t = TruthTable::constant(5, Sign::Plus).unwrap();
        assert_eq!(
            wht_with_cap(&t, 4).unwrap_err(),
            Error::ArityAboveCap { n: 5, cap: 4 }
        );
    }

    #[test]
    fn forrelation_examples() {
        let ip = inner_product_2();
        assert_eq!(forrelation(&ip, &ip).unwrap(), Dyadic::ONE);
        let c = TruthTable::constant(2, Sign::Plus).unwrap();
        assert_eq!(forrelation(&c, &c).unwrap(), Dyadic::new(1, 1));
        assert_eq!(forrelation(&ip, &table(&[1, 1, -1, 1])).unwrap(), Dyadic::ZERO);
    }

    #[test]
    fn forrelation_errors() {
        let ip = inner_product_2();
        let c3 = TruthTable::constant(3, Sign::Plus).unwrap();
        assert!(matches!(forrelation(&ip, &c3), Err(Error::DimensionMismatch { .. })));
        assert_eq!(forrelation(&c3, &c3).unwrap_err(), Error::OddArity(3));
    }

    #[test]
    fn bentness_examples() {
        assert!(is_bent(&inner_product_2()));
        assert!(!is_bent(&TruthTable::constant(2, Sign::Plus).unwrap()));
        let odd = TruthTable::constant(3, Sign::Plus).unwrap();
        assert!(!is_bent(&odd));
        assert_eq!(bentness(&odd).unwrap(), Bentness::OddArity);
    }

    #[test]
    fn dual_examples() {
        let ip = inner_product_2();
        assert_eq!(dual_from_bent(&ip).unwrap(), ip);
        assert_eq!(
            dual_from_bent(&TruthTable::constant(2, Sign::Plus).unwrap()).unwrap_err(),
            Error::NotBent
        );
    }

    #[test]
    fn bent_duality_exhaustive_n2() {
        let mut bent = 0;
        for code in 0..16u64 {
            let f = TruthTable::from_words(2, vec![code]).unwrap();
            if !is_bent(&f) {
                continue;
            }
            bent += 1;
            let g = dual_from_bent(&f).unwrap();
            assert!(is_bent(&g));
            assert_eq!(dual_from_bent(&g).unwrap(), f);
            assert_eq!(forrelation(&f, &g).unwrap(), Dyadic::ONE);
        }
        assert_eq!(bent, 8);
    }

    #[test]
    fn extremal_pairs_exhaustive_n2() {
        // All 256 pairs: |forr| <= 1 with equality exactly for g = ±dual(f).
        for fc in 0..16u64 {
            let f = TruthTable::from_words(2, vec![fc]).unwrap();
            for gc in 0..16u64 {
                let g = TruthTable::from_words(2, vec![gc]).unwrap();
                let v = forrelation(&f, &g).unwrap();
                assert_eq!(v, brute_forrelation(&f, &g));
                assert!(v <= Dyadic::ONE && v >= -Dyadic::ONE);
                let extremal = v == Dyadic::ONE || v == -Dyadic::ONE;
                let expected = match dual_from_bent(&f) {
                    Ok(d) => g == d || g == d.negated(),
                    Err(_) => false,
                };
                assert_eq!(extremal, expected, "f={fc:#x} g={gc:#x}");
            }
        }
    }

    #[test]
    fn parseval_random_tables() {
        let mut rng = crate::Rng::seed_from_u64(21);
        for n in 2..=12usize {
            for _ in 0..1000 {
                let t = TruthTable::random(n, &mut rng).unwrap();
                let s = wht(&t).unwrap();
                assert_eq!(s.sum_of_squares(), 1i128 << (2 * n));
                let bound = 1i64 << n;
                assert!(s.coeffs().iter().all(|c| c.abs() <= bound));
            }
        }
    }

    #[test]
    fn dyadic_arithmetic() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 9), Dyadic::ZERO);
        assert_eq!(Dyadic::new(8, 3), Dyadic::ONE);
        assert_eq!(Dyadic::new(1, 1) + Dyadic::new(1, 2), Dyadic::new(3, 2));
        assert_eq!(Dyadic::ONE + -Dyadic::ONE, Dyadic::ZERO);
        assert_eq!((Dyadic::ONE + Dyadic::ONE).half(), Dyadic::ONE);
        assert_eq!(Dyadic::new(1, 2).to_string(), "1/4");
        assert_eq!(Dyadic::new(-3, 3).to_string(), "-3/8");
        assert_eq!(Dyadic::ONE.to_string(), "1/1");
        assert!(Dyadic::new(1, 2) < Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(-1, 2).to_f64(), -0.25);
    }

    #[test]
    fn from_signs_rejects_bad_input() {
        assert!(TruthTable::from_signs(&[1, 1, 1]).is_err());
        assert!(TruthTable::from_signs(&[1, 0]).is_err());
        assert!(TruthTable::from_words(2, vec![0x10]).is_err());
    }

    proptest! {
        #[test]
        fn wht_is_an_involution_up_to_scale(seed in any::<u64>(), n in 0usize..12) {
            let mut rng = crate::Rng::seed_from_u64(seed);
            let t = TruthTable::random(n, &mut rng).unwrap();
            let mut twice = wht(&t).unwrap().into_coeffs();
            butterfly(&mut twice);
            let scale = 1i64 << n;
            for (x, c) in twice.iter().enumerate() {
                prop_assert_eq!(*c, scale * t.get(x).to_i64());
            }
        }

        #[test]
        fn spectrum_route_matches_double_sum(seed in any::<u64>(), half in 1usize..3) {
            let n = 2 * half;
            let mut rng = crate::Rng::seed_from_u64(seed);
            let f = TruthTable::random(n, &mut rng).unwrap();
            let g = TruthTable::random(n, &mut rng).unwrap();
            let v = forrelation(&f, &g).unwrap();
            prop_assert_eq!(v, brute_forrelation(&f, &g));
            prop_assert!(v <= Dyadic::ONE && v >= -Dyadic::ONE);
        }

        #[test]
        fn dyadic_addition_matches_floats(a in -1000i64..1000, ea in 0u32..20, b in -1000i64..1000, eb in 0u32..20) {
            let x = Dyadic::new(a, ea);
            let y = Dyadic::new(b, eb);
            prop_assert_eq!((x + y).to_f64(), x.to_f64() + y.to_f64());
            prop_assert_eq!(x < y, x.to_f64() < y.to_f64());
        }
    }
}
