//! On-disk formats.
//!
//! Bit strings are written as big-endian hex: bit `i` of a vector (or entry
//! `i` of a truth table, set when the value is `-1`) is bit `i` of the
//! number, and the string has `max(1, ceil(len / 4))` digits.
//!
//! - matrix JSON: `{"rows": r, "cols": c, "data": ["<row hex>", ...]}`
//! - truth-table file: `n=<k>` on the first line, the table hex on the
//!   second
//! - instance JSON: see [`InstanceFile`]

use std::fs;
use std::path::Path;

use forrlab_core::boolfun::TruthTable;
use forrlab_core::f2linalg::{BitMatrix, BitVector, HardMatrices};
use forrlab_core::instances::{HFunction, HardParams, Label, Variant};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed hex {0:?}")]
    Hex(String),
    #[error("expected {expected} hex digits for {bits} bits, found {found}")]
    HexLength { bits: usize, expected: usize, found: usize },
    #[error("value sets bits beyond length {0}")]
    ExtraBits(usize),
    #[error("malformed truth-table file: {0}")]
    TableFile(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Core(#[from] forrlab_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

fn hex_digits(bits: usize) -> usize {
    bits.div_ceil(4).max(1)
}

/// Hex of the low `len` bits of `words`.
pub fn bits_to_hex(words: &[u64], len: usize) -> String {
    let digits = hex_digits(len);
    let mut out = String::with_capacity(digits);
    for d in (0..digits).rev() {
        let bit = 4 * d;
        let nibble = words.get(bit / 64).map_or(0, |w| (w >> (bit % 64)) & 0xf);
        out.push(char::from_digit(nibble as u32, 16).expect("nibble"));
    }
    out
}

/// Parses hex of exactly `max(1, ceil(len / 4))` digits (an optional `0x`
/// prefix is allowed) into `ceil(len / 64)` words.
pub fn hex_to_bits(hex: &str, len: usize) -> Result<Vec<u64>> {
    let body = hex.trim();
    let body = body.strip_prefix("0x").unwrap_or(body);
    let digits = hex_digits(len);
    if body.len() != digits {
        return Err(FormatError::HexLength {
            bits: len,
            expected: digits,
            found: body.len(),
        });
    }
    let mut words = vec![0u64; len.div_ceil(64).max(1)];
    for (i, c) in body.chars().rev().enumerate() {
        let nibble = c.to_digit(16).ok_or_else(|| FormatError::Hex(hex.to_string()))? as u64;
        let bit = 4 * i;
        for b in 0..4 {
            if nibble >> b & 1 == 1 {
                if bit + b >= len {
                    return Err(FormatError::ExtraBits(len));
                }
                words[(bit + b) / 64] |= 1 << ((bit + b) % 64);
            }
        }
    }
    words.truncate(len.div_ceil(64));
    Ok(words)
}

pub fn vector_to_hex(v: &BitVector) -> String {
    bits_to_hex(v.words(), v.len())
}

pub fn vector_from_hex(len: usize, hex: &str) -> Result<BitVector> {
    Ok(BitVector::from_words(len, hex_to_bits(hex, len)?)?)
}

/// `0x`-prefixed 16-digit hex, used for 64-bit seeds and keys.
pub fn u64_to_hex(v: u64) -> String {
    format!("{v:#018x}")
}

pub fn u64_from_hex(s: &str) -> Result<u64> {
    let body = s.strip_prefix("0x").ok_or_else(|| FormatError::Hex(s.to_string()))?;
    u64::from_str_radix(body, 16).map_err(|_| FormatError::Hex(s.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<String>,
}

impl MatrixJson {
    pub fn from_matrix(m: &BitMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows()).map(|i| vector_to_hex(&m.row(i))).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<BitMatrix> {
        if self.data.len() != self.rows {
            return Err(FormatError::Core(forrlab_core::Error::DimensionMismatch {
                expected: self.rows,
                found: self.data.len(),
            }));
        }
        let rows = self
            .data
            .iter()
            .map(|r| vector_from_hex(self.cols, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix::from_rows(self.cols, &rows)?)
    }
}

pub fn table_to_text(t: &TruthTable) -> String {
    format!("n={}\n{}\n", t.arity(), bits_to_hex(t.words(), t.len()))
}

pub fn table_from_text(text: &str) -> Result<TruthTable> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| FormatError::TableFile("empty file".into()))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FormatError::TableFile(format!("bad header {header:?}")))?;
    if n > forrlab_core::boolfun::DEFAULT_ARITY_CAP {
        return Err(forrlab_core::Error::ArityAboveCap {
            n,
            cap: forrlab_core::boolfun::DEFAULT_ARITY_CAP,
        }
        .into());
    }
    let body = lines.next().ok_or_else(|| FormatError::TableFile("missing table".into()))?;
    if lines.next().is_some() {
        return Err(FormatError::TableFile("trailing content".into()));
    }
    Ok(TruthTable::from_words(n, hex_to_bits(body, 1usize << n)?)?)
}

pub fn read_table(path: &Path) -> Result<TruthTable> {
    table_from_text(&fs::read_to_string(path)?)
}

pub fn write_table(path: &Path, t: &TruthTable) -> Result<()> {
    Ok(fs::write(path, table_to_text(t))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HJson {
    Uniform { arity: usize, seed: String },
    Table { arity: usize, table: String },
    Poly { arity: usize, degree: u32, monomials: Vec<String> },
    Prf { arity: usize, key: String },
}

impl HJson {
    pub fn from_h(h: &HFunction) -> Self {
        match h {
            HFunction::UniformLazy { arity, seed } => HJson::Uniform {
                arity: *arity,
                seed: u64_to_hex(*seed),
            },
            HFunction::Table(t) => HJson::Table {
                arity: t.arity(),
                table: bits_to_hex(t.words(), t.len()),
            },
            HFunction::Poly {
                arity,
                degree,
                monomials,
            } => HJson::Poly {
                arity: *arity,
                degree: *degree,
                monomials: monomials.iter().map(vector_to_hex).collect(),
            },
            HFunction::ToyPrf { arity, key } => HJson::Prf {
                arity: *arity,
                key: u64_to_hex(*key),
            },
        }
    }

    pub fn to_h(&self) -> Result<HFunction> {
        Ok(match self {
            HJson::Uniform { arity, seed } => HFunction::UniformLazy {
                arity: *arity,
                seed: u64_from_hex(seed)?,
            },
            HJson::Table { arity, table } => {
                if *arity > forrlab_core::boolfun::DEFAULT_ARITY_CAP {
                    return Err(FormatError::Inconsistent(format!("table arity {arity} too large")));
                }
                HFunction::Table(TruthTable::from_words(*arity, hex_to_bits(table, 1usize << arity)?)?)
            }
            HJson::Poly {
                arity,
                degree,
                monomials,
            } => {
                let monomials = monomials
                    .iter()
                    .map(|m| vector_from_hex(*arity, m))
                    .collect::<Result<Vec<_>>>()?;
                if monomials.iter().any(|m| m.weight() > *degree) {
                    return Err(FormatError::Inconsistent("monomial above the stated degree".into()));
                }
                HFunction::Poly {
                    arity: *arity,
                    degree: *degree,
                    monomials,
                }
            }
            HJson::Prf { arity, key } => HFunction::ToyPrf {
                arity: *arity,
                key: u64_from_hex(key)?,
            },
        })
    }
}

/// Instance parameters. `B` and `b` are derived from `A` and `a`; they are
/// written for convenience and checked when read back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub n: usize,
    pub variant: String,
    pub label: String,
    #[serde(rename = "A")]
    pub mat_a: Vec<String>,
    #[serde(rename = "a")]
    pub shift_a: String,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub mat_b: Option<Vec<String>>,
    #[serde(rename = "b", default, skip_serializing_if = "Option::is_none")]
    pub shift_b: Option<String>,
    pub h: HJson,
}

fn rows_hex(m: &BitMatrix) -> Vec<String> {
    (0..m.rows()).map(|i| vector_to_hex(&m.row(i))).collect()
}

impl InstanceFile {
    pub fn from_params(p: &HardParams) -> Self {
        let m = p.matrices();
        Self {
            schema_version: SCHEMA_VERSION,
            n: p.n(),
            variant: p.variant().to_string(),
            label: p.label().to_string(),
            mat_a: rows_hex(m.mat_a()),
            shift_a: vector_to_hex(m.shift_a()),
            mat_b: Some(rows_hex(m.mat_b())),
            shift_b: Some(vector_to_hex(m.shift_b())),
            h: HJson::from_h(p.h()),
        }
    }

    pub fn to_params(&self) -> Result<HardParams> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::Schema(self.schema_version));
        }
        let n = self.n;
        let variant: Variant = self.variant.parse()?;
        let label: Label = self.label.parse()?;
        let a = MatrixJson {
            rows: self.mat_a.len(),
            cols: n,
            data: self.mat_a.clone(),
        }
        .to_matrix()?;
        let matrices = HardMatrices::from_parts(a, vector_from_hex(n, &self.shift_a)?)?;
        if let Some(rows) = &self.mat_b {
            if *rows != rows_hex(matrices.mat_b()) {
                return Err(FormatError::Inconsistent("B is not (A^T)^-1".into()));
            }
        }
        if let Some(b) = &self.shift_b {
            if *b != vector_to_hex(matrices.shift_b()) {
                return Err(FormatError::Inconsistent("b does not match A and a".into()));
            }
        }
        let params = HardParams::new(matrices, self.h.to_h()?, variant, label)?;
        if params.matrices().shift_a() != &vector_from_hex(n, &self.shift_a)? {
            return Err(FormatError::Inconsistent(format!("the {variant} variant has no shift")));
        }
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn read_instance(path: &Path) -> Result<HardParams> {
    InstanceFile::from_json(&fs::read_to_string(path)?)?.to_params()
}

pub fn write_instance(path: &Path, p: &HardParams) -> Result<()> {
    Ok(fs::write(path, InstanceFile::from_params(p).to_json())?)
}

/// Row-major CSV of doubles, one matrix row per line.
pub fn real_matrix_to_csv(dim: usize, data: &[f64]) -> String {
    let mut out = String::new();
    for row in data.chunks(dim) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn real_matrix_from_csv(text: &str) -> Result<(usize, Vec<f64>)> {
    let mut data = Vec::new();
    let mut rows = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| FormatError::TableFile(format!("bad number {cell:?}")))?;
            data.push(v);
        }
        rows += 1;
    }
    if data.len() != rows * rows {
        return Err(FormatError::TableFile(format!("{} values do not form a {rows}x{rows} matrix", data.len())));
    }
    Ok((rows, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_examples() {
        assert_eq!(bits_to_hex(&[0b1011], 4), "b");
        assert_eq!(bits_to_hex(&[0b1], 1), "1");
        assert_eq!(bits_to_hex(&[0x1ff], 9), "1ff");
        assert_eq!(bits_to_hex(&[], 0), "0");
        assert_eq!(hex_to_bits("0x1ff", 9).unwrap(), vec![0x1ff]);
        assert!(matches!(hex_to_bits("3ff", 9), Err(FormatError::ExtraBits(9))));
        assert!(matches!(hex_to_bits("ff", 9), Err(FormatError::HexLength { .. })));
        assert!(matches!(hex_to_bits("1fg", 9), Err(FormatError::Hex(_))));
        let long = "8".to_string() + &"0".repeat(16);
        assert_eq!(hex_to_bits(&long, 68).unwrap(), vec![0, 8]);
    }

    #[test]
    fn table_text() {
        let ip = TruthTable::from_signs(&[1, 1, 1, -1]).unwrap();
        assert_eq!(table_to_text(&ip), "n=2\n8\n");
        assert_eq!(table_from_text("n=2\n8\n").unwrap(), ip);
        assert!(table_from_text("n=2\n").is_err());
        assert!(table_from_text("m=2\n8\n").is_err());
        assert!(table_from_text("n=2\n18\n").is_err());
        assert!(table_from_text("n=2\n8\nextra\n").is_err());
    }

    #[test]
    fn matrix_json() {
        let m = BitMatrix::from_row_bits(3, &[0b101, 0b010]);
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(j.data, ["5", "2"]);
        assert_eq!(j.to_matrix().unwrap(), m);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"rows":2,"cols":3,"data":["5","2"]}"#);
    }

    #[test]
    fn seeds_as_hex() {
        assert_eq!(u64_to_hex(255), "0x00000000000000ff");
        assert_eq!(u64_from_hex("0x00000000000000ff").unwrap(), 255);
        assert!(u64_from_hex("ff").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let data = [1.0, -0.5, 0.25, 1e-17];
        let text = real_matrix_to_csv(2, &data);
        assert_eq!(real_matrix_from_csv(&text).unwrap(), (2, data.to_vec()));
        assert!(real_matrix_from_csv("1,2\n3\n").is_err());
    }
}
