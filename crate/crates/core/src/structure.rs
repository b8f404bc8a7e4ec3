//! Strong rank, the `N_d` threshold, and the partition of square 0/1
//! matrices into `R`, `S1`, `S2`, `S3`, `S4`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CubeError, Result};
use crate::exact;
use crate::matrix::{kernel_normal, BinaryMatrix, IntegerVector};

/// Default family-size limit for the subset search in [`strong_rank`].
pub const STRONG_RANK_LIMIT: usize = 14;

/// Next larger integer with the same number of set bits (Gosper's hack).
fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

fn select(columns: &[u64], mask: u64, out: &mut Vec<u64>) {
    out.clear();
    let mut m = mask;
    while m != 0 {
        out.push(columns[m.trailing_zeros() as usize]);
        m &= m - 1;
    }
}

/// Largest `k` such that every `k`-subset of the family is linearly
/// independent, i.e. the size of a smallest dependent subset minus one.
/// Families larger than [`STRONG_RANK_LIMIT`] are refused.
pub fn strong_rank(columns: &[u64], dim: usize) -> Result<usize> {
    strong_rank_with_limit(columns, dim, STRONG_RANK_LIMIT)
}

pub fn strong_rank_with_limit(columns: &[u64], dim: usize, limit: usize) -> Result<usize> {
    let m = columns.len();
    if m == 0 {
        return Err(CubeError::InvalidInput(
            "strong rank of an empty family".into(),
        ));
    }
    if m > limit.min(63) {
        return Err(CubeError::TooExpensive { size: m, limit });
    }
    if columns.contains(&0) {
        return Ok(0);
    }
    // nonzero 0/1 vectors are proportional only when equal
    for (i, a) in columns.iter().enumerate() {
        if columns[i + 1..].contains(a) {
            return Ok(1);
        }
    }
    if exact::is_independent(columns, dim) {
        return Ok(m);
    }
    let mut subset = Vec::with_capacity(m);
    for k in 3..m {
        let mut mask: u64 = (1 << k) - 1;
        while mask < (1u64 << m) {
            select(columns, mask, &mut subset);
            if !exact::is_independent(&subset, dim) {
                return Ok(k - 1);
            }
            mask = next_combination(mask);
        }
    }
    Ok(m - 1)
}

/// Strong rank of the column family of `m`.
pub fn column_strong_rank(m: &BinaryMatrix) -> Result<usize> {
    strong_rank(m.columns(), m.rows())
}

/// Strong rank of the row family of `m`; in general different from the
/// column strong rank.
pub fn row_strong_rank(m: &BinaryMatrix) -> Result<usize> {
    let rows: Vec<u64> = (0..m.rows()).map(|i| m.row_word(i)).collect();
    strong_rank(&rows, m.cols())
}

/// The strong-rank threshold `N_d = floor(d - 3d / ln d)`, clamped to 1
/// where the formula drops below 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub d: usize,
    /// Unclamped `floor(d - 3d / ln d)`; absent for `d < 2`.
    pub raw: Option<i64>,
    pub n_d: usize,
}

impl Threshold {
    pub fn clamped(&self) -> bool {
        self.raw != Some(self.n_d as i64)
    }
}

/// `floor(d - 3d / ln d)` without clamping.
pub fn raw_threshold(d: usize) -> Option<i64> {
    if d < 2 {
        return None;
    }
    let d = d as f64;
    Some((d - 3.0 * d / d.ln()).floor() as i64)
}

pub fn n_threshold(d: usize) -> Threshold {
    let raw = raw_threshold(d);
    let n_d = match raw {
        Some(r) if r >= 1 => r as usize,
        _ => 1,
    };
    Threshold { d, raw, n_d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    R,
    S1,
    S2,
    S3,
    S4,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::R,
        ClassLabel::S1,
        ClassLabel::S2,
        ClassLabel::S3,
        ClassLabel::S4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Label of a `d x d` matrix from its rank and strong rank. `S1` is tested
/// before `S2`, and `N_d` is clamped to at least 1, so the classes are
/// disjoint for every `d`.
pub fn label_for(d: usize, rank: usize, strong_rank: usize) -> ClassLabel {
    if rank >= d {
        return ClassLabel::R;
    }
    let n_d = n_threshold(d).n_d;
    let extreme = strong_rank == 1 || strong_rank > n_d;
    if rank + 1 == d {
        if strong_rank == 1 {
            ClassLabel::S1
        } else if strong_rank > n_d {
            ClassLabel::S2
        } else {
            ClassLabel::S3
        }
    } else if extreme {
        ClassLabel::S4
    } else {
        ClassLabel::S3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixClass {
    pub label: ClassLabel,
    pub rank: usize,
    pub strong_rank: usize,
    /// `|supp(a)|` of the kernel vector when the rank is `d-1`.
    pub kernel_support: Option<usize>,
}

/// Classifies a square matrix by its column family.
pub fn classify(m: &BinaryMatrix) -> Result<MatrixClass> {
    if !m.is_square() {
        return Err(CubeError::InvalidInput(format!(
            "classification needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = m.rows();
    let (rank, _) = exact::family_rank(m.columns(), d);
    let sr = column_strong_rank(m)?;
    let kernel_support = if rank + 1 == d {
        Some(kernel_vector(m)?.support_size())
    } else {
        None
    };
    Ok(MatrixClass {
        label: label_for(d, rank, sr),
        rank,
        strong_rank: sr,
        kernel_support,
    })
}

/// Nonzero integer `a` with `sum_k a_k * column_k = 0` for a square matrix
/// of rank `d-1`, built as the cofactor normal of `d-1` independent rows.
pub fn kernel_vector(m: &BinaryMatrix) -> Result<IntegerVector> {
    let d = m.rows();
    if !m.is_square() {
        return Err(CubeError::InvalidInput(
            "kernel vector needs a square matrix".into(),
        ));
    }
    let (rank, _) = exact::family_rank(m.columns(), d);
    if rank == d {
        return Err(CubeError::InvalidInput(
            "matrix is nonsingular; kernel is trivial".into(),
        ));
    }
    if rank + 1 < d {
        return Err(CubeError::RankDeficient {
            rank,
            required: d - 1,
        });
    }
    if d == 1 {
        return Ok(IntegerVector::from(vec![1]));
    }
    let mut rows: Vec<u64> = Vec::with_capacity(d - 1);
    for i in 0..d {
        rows.push(m.row_word(i));
        if !exact::is_independent(&rows, d) {
            rows.pop();
        }
        if rows.len() + 1 == d {
            break;
        }
    }
    kernel_normal(&BinaryMatrix::from_columns(d, rows)?)
}

/// Index-by-index check that deleting column `k` of a rank-`(d-1)` matrix
/// leaves an independent family exactly when `a_k != 0`, plus the support
/// identity `|supp(a)| = strong rank + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSupportRecord {
    pub kernel: IntegerVector,
    pub support: Vec<usize>,
    /// Entry `k`: the family without column `k` is independent.
    pub deletion_independent: Vec<bool>,
    pub strong_rank: usize,
    pub equivalence_holds: bool,
    pub support_matches_strong_rank: bool,
}

impl KernelSupportRecord {
    pub fn holds(&self) -> bool {
        self.equivalence_holds && self.support_matches_strong_rank
    }
}

pub fn kernel_support_check(m: &BinaryMatrix) -> Result<KernelSupportRecord> {
    let kernel = kernel_vector(m)?;
    let d = m.rows();
    let deletion_independent: Vec<bool> = (0..d)
        .map(|k| {
            let mut rest = m.columns().to_vec();
            rest.remove(k);
            exact::is_independent(&rest, d)
        })
        .collect();
    let support = kernel.support();
    let equivalence_holds = (0..d).all(|k| deletion_independent[k] == support.contains(&k));
    let strong_rank = column_strong_rank(m)?;
    Ok(KernelSupportRecord {
        support_matches_strong_rank: support.len() == strong_rank + 1,
        kernel,
        support,
        deletion_independent,
        strong_rank,
        equivalence_holds,
    })
}
