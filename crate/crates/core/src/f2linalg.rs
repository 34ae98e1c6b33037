//! Bit-packed linear algebra over F2.
//!
//! Coordinate `i` of a vector is bit `i % 64` of word `i / 64`. The integer
//! index of a vector (used to address truth tables) therefore has bit `i`
//! equal to coordinate `i`. Splitting an even-length vector in halves puts
//! coordinates `0..n/2` in the first half and `n/2..n` in the second, which
//! matches the upper/lower split of matrix rows.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

use crate::error::{invalid, Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Vector whose coordinate `i` is bit `i` of `bits`. Higher bits of
    /// `bits` beyond `len` are discarded.
    pub fn from_u64(len: usize, bits: u64) -> Self {
        let mut v = Self::zeros(len);
        if let Some(w) = v.words.first_mut() {
            *w = bits;
        }
        v.clear_tail();
        v
    }

    /// Builds a vector from packed words; fails if bits beyond `len` are set.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::DimensionMismatch {
                expected: words_for(len),
                found: words.len(),
            });
        }
        let v = Self { len, words };
        if let Some(&last) = v.words.last() {
            if last & !tail_mask(len) != 0 {
                return Err(invalid("bits set beyond vector length"));
            }
        }
        Ok(v)
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = rng.next_u64();
        }
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let mask = tail_mask(self.len);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "coordinate {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range {}", self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    /// Coordinate-wise sum over F2.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.xor_assign_unchecked(other);
        Ok(out)
    }

    pub(crate) fn xor_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &Self) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// The vector as an integer, when it fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Truth-table index of the vector, when it fits.
    pub fn index(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    /// Coordinates `start..start + len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len);
        let mut out = Self::zeros(len);
        if start % WORD == 0 {
            let first = start / WORD;
            let count = out.words.len();
            out.words.copy_from_slice(&self.words[first..first + count]);
            out.clear_tail();
        } else {
            for i in 0..len {
                if self.get(start + i) {
                    out.set(i, true);
                }
            }
        }
        out
    }

    /// First and second halves of an even-length vector.
    pub fn split_halves(&self) -> Result<(Self, Self)> {
        if self.len % 2 != 0 {
            return Err(Error::OddArity(self.len));
        }
        let half = self.len / 2;
        Ok((self.slice(0, half), self.slice(half, half)))
    }

    /// `first` followed by `second`.
    pub fn concat(first: &Self, second: &Self) -> Self {
        let mut out = Self::zeros(first.len + second.len);
        out.words[..first.words.len()].copy_from_slice(&first.words);
        for i in 0..second.len {
            if second.get(i) {
                out.set(first.len + i, true);
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, "]")
    }
}

/// Row-major bit matrix. Entry `(i, j)` is coordinate `j` of row `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Matrix with at most 64 columns from one integer per row.
    pub fn from_row_bits(cols: usize, rows: &[u64]) -> Self {
        assert!(cols <= WORD);
        let rows: Vec<BitVector> = rows.iter().map(|&r| BitVector::from_u64(cols, r)).collect();
        Self::from_rows(cols, &rows).expect("rows built with matching length")
    }

    /// Decodes `index` as a `rows x cols` matrix: row `i` is taken from bits
    /// `i*cols .. (i+1)*cols` of `index`. Used to enumerate small matrices.
    pub fn from_index(rows: usize, cols: usize, index: u64) -> Self {
        assert!(rows * cols <= WORD && cols > 0);
        let mask = tail_mask(cols);
        let row_bits: Vec<u64> = (0..rows).map(|i| (index >> (i * cols)) & mask).collect();
        Self::from_row_bits(cols, &row_bits)
    }

    /// Inverse of [`BitMatrix::from_index`].
    pub fn to_index(&self) -> Option<u64> {
        if self.rows * self.cols > WORD || self.cols == 0 {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| self.row_words(i)[0] << (i * self.cols))
                .fold(0, |acc, r| acc | r),
        )
    }

    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let mask = tail_mask(cols);
        for i in 0..rows {
            let words = m.row_words_mut(i);
            for w in words.iter_mut() {
                *w = rng.next_u64();
            }
            if let Some(last) = words.last_mut() {
                *last &= mask;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(i).to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        (self.row_words(i)[j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        let bit = 1u64 << (j % WORD);
        let w = &mut self.row_words_mut(i)[j / WORD];
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    /// `M v`: coordinate `i` is the parity of row `i` AND `v`.
    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.mat_vec_unchecked(v))
    }

    pub(crate) fn mat_vec_unchecked(&self, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            let ones: u32 = self
                .row_words(i)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for w in 0..out.stride {
                        out.data[i * out.stride + w] ^= other.data[k * other.stride + w];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// Rows `0..rows/2`.
    pub fn upper_half(&self) -> Self {
        assert!(self.rows % 2 == 0, "half split needs an even row count");
        self.row_block(0, self.rows / 2)
    }

    /// Rows `rows/2..rows`.
    pub fn lower_half(&self) -> Self {
        assert!(self.rows % 2 == 0, "half split needs an even row count");
        self.row_block(self.rows / 2, self.rows / 2)
    }

    fn row_block(&self, start: usize, count: usize) -> Self {
        Self {
            rows: count,
            cols: self.cols,
            stride: self.stride,
            data: self.data[start * self.stride..(start + count) * self.stride].to_vec(),
        }
    }

    /// `top` stacked above `bottom`.
    pub fn stack(top: &Self, bottom: &Self) -> Result<Self> {
        if top.cols != bottom.cols {
            return Err(Error::DimensionMismatch {
                expected: top.cols,
                found: bottom.cols,
            });
        }
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Ok(Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            stride: top.stride,
            data,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows) && self.is_square()
    }

    /// Row rank by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..work.rows).find(|&r| work.get(r, col)) else {
                continue;
            };
            work.swap_rows(rank, pivot);
            for r in 0..work.rows {
                if r != rank && work.get(r, col) {
                    work.xor_row_into(rank, r);
                }
            }
            rank += 1;
            if rank == work.rows {
                break;
            }
        }
        rank
    }

    pub fn has_full_row_rank(&self) -> bool {
        self.rank() == self.rows
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    /// Gauss-Jordan inverse. Returns [`Error::Singular`] for rank-deficient
    /// input; the result is checked against `M * inverse = I`.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| work.get(r, col)).ok_or(Error::Singular)?;
            work.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            for r in 0..n {
                if r != col && work.get(r, col) {
                    work.xor_row_into(col, r);
                    inv.xor_row_into(col, r);
                }
            }
        }
        if !self.mul(&inv)?.is_identity() {
            return Err(Error::Internal("inverse check failed".into()));
        }
        Ok(inv)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Uniform invertible `n x n` matrix by rejection sampling.
pub fn sample_invertible<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    assert!(n >= 1, "dimension must be positive");
    loop {
        let m = BitMatrix::random(n, n, rng);
        if m.rank() == n {
            return m;
        }
    }
}

/// Number of `rows x cols` matrices over F2 with full row rank,
/// `prod_{i=1}^{rows} (2^cols - 2^{i-1})`, when it fits in a `u128`.
pub fn full_row_rank_count(rows: usize, cols: usize) -> Option<u128> {
    if rows > cols {
        return Some(0);
    }
    let total = 1u128.checked_shl(cols as u32)?;
    (1..=rows).try_fold(1u128, |acc, i| acc.checked_mul(total - (1u128 << (i - 1))))
}

/// The matrix quadruple `(A, B, a, b)` behind a hard instance.
///
/// `B = (A^T)^{-1}` and `b = B^T [B2; B1] a`, where `B1`/`B2` are the upper
/// and lower halves of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardMatrices {
    mat_a: BitMatrix,
    mat_b: BitMatrix,
    shift_a: BitVector,
    shift_b: BitVector,
}

impl HardMatrices {
    /// Completes `(A, a)` to the full quadruple.
    pub fn from_parts(mat_a: BitMatrix, shift_a: BitVector) -> Result<Self> {
        if !mat_a.is_square() {
            return Err(Error::NotSquare {
                rows: mat_a.rows(),
                cols: mat_a.cols(),
            });
        }
        let n = mat_a.rows();
        if n == 0 || n % 2 != 0 {
            return Err(Error::OddArity(n));
        }
        if shift_a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: shift_a.len(),
            });
        }
        let mat_b = mat_a.transpose().invert()?;
        let swapped = BitMatrix::stack(&mat_b.lower_half(), &mat_b.upper_half())?;
        let shift_b = mat_b.transpose().mat_vec(&swapped.mat_vec(&shift_a)?)?;
        Ok(Self {
            mat_a,
            mat_b,
            shift_a,
            shift_b,
        })
    }

    pub fn n(&self) -> usize {
        self.mat_a.rows()
    }

    pub fn mat_a(&self) -> &BitMatrix {
        &self.mat_a
    }

    pub fn mat_b(&self) -> &BitMatrix {
        &self.mat_b
    }

    pub fn shift_a(&self) -> &BitVector {
        &self.shift_a
    }

    pub fn shift_b(&self) -> &BitVector {
        &self.shift_b
    }

    /// Same `A`, both shifts forced to zero.
    pub fn without_shift(&self) -> Self {
        Self {
            mat_a: self.mat_a.clone(),
            mat_b: self.mat_b.clone(),
            shift_a: BitVector::zeros(self.n()),
            shift_b: BitVector::zeros(self.n()),
        }
    }
}

/// Samples `A` uniform invertible and `a` uniform, then completes them.
pub fn sample_hard_matrices<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<HardMatrices> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddArity(n));
    }
    let mat_a = sample_invertible(n, rng);
    let shift_a = BitVector::random(n, rng);
    HardMatrices::from_parts(mat_a, shift_a)
}

/// Uniform nonzero vector of length `len`.
pub fn random_nonzero<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> BitVector {
    assert!(len > 0);
    loop {
        let v = BitVector::random(len, rng);
        if !v.is_zero() {
            return v;
        }
    }
}
