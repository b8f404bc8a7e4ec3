//! Bit-packed 0/1 matrices, exact integer vectors, and the exact
//! rank/determinant/cofactor-normal routines built on them.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{CubeError, Result};
use crate::exact::{self, RankMethod};
use crate::rng::SampleStream;

/// Largest supported row count; one column is one `u64` word.
pub const MAX_ROWS: usize = 64;

/// Mask with the low `bits` bits set.
#[inline]
pub fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A `rows x cols` matrix with entries in {0,1}, stored column by column.
/// Bit `i` of `columns[j]` is the entry in row `i`, column `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    columns: Vec<u64>,
}

impl BinaryMatrix {
    pub fn from_columns(rows: usize, columns: Vec<u64>) -> Result<Self> {
        if rows == 0 || rows > MAX_ROWS {
            return Err(CubeError::InvalidInput(format!(
                "row count must be in 1..={MAX_ROWS}, got {rows}"
            )));
        }
        if columns.is_empty() {
            return Err(CubeError::InvalidInput("matrix has no columns".into()));
        }
        let mask = low_mask(rows);
        if let Some(c) = columns.iter().find(|&&c| c & !mask != 0) {
            return Err(CubeError::InvalidInput(format!(
                "column {c:#x} has bits outside {rows} rows"
            )));
        }
        Ok(BinaryMatrix { rows, columns })
    }

    /// Build from explicit rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        let Some(first) = rows.first() else {
            return Err(CubeError::InvalidInput("matrix has no rows".into()));
        };
        let m = first.as_ref().len();
        let mut columns = vec![0u64; m];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(CubeError::InvalidInput(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                match x {
                    0 => {}
                    1 => columns[j] |= 1 << i,
                    _ => {
                        return Err(CubeError::InvalidInput(format!(
                            "entry ({i},{j}) is {x}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Self::from_columns(d, columns)
    }

    /// Parse rows given as lines of `0`/`1` characters. Blank lines and
    /// whitespace inside a line are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let mut row = Vec::new();
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '0' => row.push(0u8),
                    '1' => row.push(1u8),
                    other => {
                        return Err(CubeError::InvalidInput(format!(
                            "line {}: unexpected character {other:?}",
                            n + 1
                        )))
                    }
                }
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
        Self::from_rows(&rows)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::from_columns(d, (0..d).map(|i| 1u64 << i).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.columns.len()
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        (self.columns[col] >> row) & 1 == 1
    }

    /// Row `i` packed into a word (bit `j` is column `j`).
    pub fn row_word(&self, i: usize) -> u64 {
        self.columns
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &c)| acc | (((c >> i) & 1) << j))
    }

    pub fn transpose(&self) -> Result<Self> {
        let rows = (0..self.rows).map(|i| self.row_word(i)).collect();
        Self::from_columns(self.cols(), rows)
    }

    /// Copy with row `i` deleted.
    pub fn without_row(&self, i: usize) -> Result<Self> {
        let cols = self.columns.iter().map(|&c| delete_bit(c, i)).collect();
        Self::from_columns(self.rows - 1, cols)
    }

    /// Copy with column `j` deleted.
    pub fn without_column(&self, j: usize) -> Result<Self> {
        let mut cols = self.columns.clone();
        cols.remove(j);
        Self::from_columns(self.rows, cols)
    }
}

/// Remove bit `i` from `word`, shifting higher bits down.
pub(crate) fn delete_bit(word: u64, i: usize) -> u64 {
    let low = word & low_mask(i);
    let high = word.checked_shr(i as u32 + 1).unwrap_or(0);
    low | high.checked_shl(i as u32).unwrap_or(0)
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols() {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// An exact integer vector of arbitrary magnitude.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerVector(pub Vec<BigInt>);

impl IntegerVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Indices of the nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|x| !x.is_zero()).count()
    }

    /// Inner product with a packed 0/1 vector.
    pub fn dot_bits(&self, bits: u64) -> BigInt {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, _)| (bits >> i) & 1 == 1)
            .map(|(_, a)| a)
            .sum()
    }

    /// Entries as `i128` when every partial sum of absolute values fits,
    /// which makes all subset sums representable.
    pub fn to_i128_sums(&self) -> Option<Vec<i128>> {
        let mut total: i128 = 0;
        let mut out = Vec::with_capacity(self.len());
        for a in &self.0 {
            let v = a.to_i128()?;
            total = total.checked_add(v.checked_abs()?)?;
            out.push(v);
        }
        Some(out)
    }

    pub fn abs_max(&self) -> BigInt {
        self.0.iter().map(|a| a.abs()).max().unwrap_or_default()
    }
}

impl From<Vec<i64>> for IntegerVector {
    fn from(v: Vec<i64>) -> Self {
        IntegerVector(v.into_iter().map(BigInt::from).collect())
    }
}

impl fmt::Display for IntegerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Rational rank of a matrix and, for square input, its exact determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankResult {
    pub rank: usize,
    pub determinant: Option<BigInt>,
    pub method: RankMethod,
}

/// Rank over the rationals. Square input always goes through exact
/// fraction-free elimination so the determinant is available; other shapes
/// may be certified full rank by the modular fast path.
pub fn rank_exact(m: &BinaryMatrix) -> RankResult {
    if m.is_square() {
        let (rank, det) = exact::exact_rank_det(m.columns(), m.rows());
        RankResult {
            rank,
            determinant: Some(det),
            method: RankMethod::ExactFractionFree,
        }
    } else {
        let (rank, method) = exact::family_rank(m.columns(), m.rows());
        RankResult {
            rank,
            determinant: None,
            method,
        }
    }
}

/// Rank only, through the modular fast path with an exact arbiter.
pub fn rank(m: &BinaryMatrix) -> usize {
    exact::family_rank(m.columns(), m.rows()).0
}

/// Singularity test for square matrices used in sampling loops.
pub fn is_singular(m: &BinaryMatrix) -> bool {
    debug_assert!(m.is_square());
    exact::family_rank(m.columns(), m.rows()).0 < m.rows()
}

/// Exact determinant of a square matrix.
pub fn determinant(m: &BinaryMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(CubeError::InvalidInput(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(exact::exact_rank_det(m.columns(), m.rows()).1)
}

/// Cofactor normal of a `d x (d-1)` matrix of rank `d-1`:
/// `a_j = (-1)^j det(M without row j)` with 1-based `j`. The result is
/// orthogonal to every column and nonzero.
pub fn kernel_normal(m: &BinaryMatrix) -> Result<IntegerVector> {
    let d = m.rows();
    if m.cols() + 1 != d {
        return Err(CubeError::InvalidInput(format!(
            "kernel normal needs a d x (d-1) matrix, got {}x{}",
            d,
            m.cols()
        )));
    }
    let r = rank(m);
    if r < d - 1 {
        return Err(CubeError::RankDeficient {
            rank: r,
            required: d - 1,
        });
    }
    let mut entries = Vec::with_capacity(d);
    let mut minor = vec![0u64; d - 1];
    for i in 0..d {
        for (dst, &c) in minor.iter_mut().zip(m.columns()) {
            *dst = delete_bit(c, i);
        }
        let det = exact::exact_rank_det(&minor, d - 1).1;
        // 0-based row i is 1-based row i+1
        entries.push(if i % 2 == 0 { -det } else { det });
    }
    Ok(IntegerVector(entries))
}

/// A `d x d` matrix whose entries are fair bits drawn from `stream`.
pub fn random_matrix(d: usize, stream: &mut SampleStream) -> Result<BinaryMatrix> {
    if d == 0 || d > MAX_ROWS {
        return Err(CubeError::InvalidInput(format!(
            "dimension must be in 1..={MAX_ROWS}, got {d}"
        )));
    }
    let cols = (0..d).map(|_| stream.next_bits(d)).collect();
    BinaryMatrix::from_columns(d, cols)
}
