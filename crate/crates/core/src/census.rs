//! Exact enumeration of all `d x d` 0/1 matrices for small `d`: counts by
//! rank and by class, the exact singularity probability, and checks of the
//! counting identities that relate the classes to `|G|` and `E(d)`.
//!
//! Two enumerators produce the same report. [`enumerate_full`] visits every
//! matrix and computes rank and strong rank directly. [`enumerate_symmetric`]
//! visits one representative per multiset of columns (columns in
//! nondecreasing order) and weights it by the number of distinct column
//! orders. Rank, strong rank and both class labels are invariant under
//! column permutation, so the weighted tallies are exact.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{CubeError, Result};
use crate::exact;
use crate::matrix::{low_mask, BinaryMatrix};
use crate::span::{exact_e, ExactE};
use crate::structure::{self, label_for, n_threshold, ClassLabel};
use crate::subspace::{PointSet, ReducedBasis};

/// Largest dimension for [`enumerate_full`].
pub const FULL_LIMIT: usize = 5;
/// Largest dimension for [`enumerate_symmetric`].
pub const SYMMETRIC_LIMIT: usize = 6;
/// Largest dimension for which row-family labels are tallied.
pub const ROW_VARIANT_LIMIT: usize = 5;
/// Largest dimension for [`verify_identities`].
pub const IDENTITY_LIMIT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    FullEnumeration,
    SortedColumnSymmetry,
}

/// Counts per class label, indexed by [`ClassLabel::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts(pub [u64; 5]);

impl ClassCounts {
    pub fn get(&self, label: ClassLabel) -> u64 {
        self.0[label.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    fn add(&mut self, label: ClassLabel, weight: u64) {
        self.0[label.index()] += weight;
    }

    fn merge(&mut self, other: &ClassCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusReport {
    pub d: usize,
    /// `2^(d^2)`.
    pub total: u64,
    pub singular: u64,
    /// Entry `r` counts matrices of rank `r`.
    pub by_rank: Vec<u64>,
    /// Entry `k` counts matrices whose column strong rank is `k`.
    pub by_strong_rank: Vec<u64>,
    pub by_class: ClassCounts,
    /// Class tallies with the row family in place of the column family;
    /// only for `d <= ROW_VARIANT_LIMIT`.
    pub by_class_rows: Option<ClassCounts>,
    /// Matrices whose row-family label differs from the column-family one.
    pub row_label_mismatches: Option<u64>,
    pub n_d: usize,
    pub g_count: u64,
    pub e_exact: BigRational,
    pub ps_exact: BigRational,
    pub mode: CensusMode,
    /// Column-multiset representatives visited (equals `total` in full mode).
    pub visited: u64,
}

impl CensusReport {
    pub fn regular(&self) -> u64 {
        self.by_rank[self.d]
    }

    pub fn ps_f64(&self) -> f64 {
        self.singular as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, Default)]
struct Tallies {
    by_rank: Vec<u64>,
    by_strong_rank: Vec<u64>,
    by_class: ClassCounts,
    by_class_rows: ClassCounts,
    mismatches: u64,
    visited: u64,
}

impl Tallies {
    fn new(d: usize) -> Self {
        Tallies {
            by_rank: vec![0; d + 1],
            by_strong_rank: vec![0; d + 1],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tallies) -> Tallies {
        for (a, b) in self.by_rank.iter_mut().zip(&other.by_rank) {
            *a += b;
        }
        for (a, b) in self.by_strong_rank.iter_mut().zip(&other.by_strong_rank) {
            *a += b;
        }
        self.by_class.merge(&other.by_class);
        self.by_class_rows.merge(&other.by_class_rows);
        self.mismatches += other.mismatches;
        self.visited += other.visited;
        self
    }

    fn record(
        &mut self,
        d: usize,
        rank: usize,
        sr: usize,
        row_label: Option<ClassLabel>,
        weight: u64,
    ) {
        let label = label_for(d, rank, sr);
        self.by_rank[rank] += weight;
        self.by_strong_rank[sr] += weight;
        self.by_class.add(label, weight);
        if let Some(rl) = row_label {
            self.by_class_rows.add(rl, weight);
            if rl != label {
                self.mismatches += weight;
            }
        }
        self.visited += 1;
    }
}

fn transpose_words(columns: &[u64], d: usize) -> Vec<u64> {
    (0..d)
        .map(|i| {
            columns
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &c)| acc | (((c >> i) & 1) << j))
        })
        .collect()
}

/// Row-family label: rank is shared, strong rank taken over the rows.
fn row_label(columns: &[u64], d: usize, rank: usize) -> ClassLabel {
    if rank == d {
        return ClassLabel::R;
    }
    let rows = transpose_words(columns, d);
    let sr = structure::strong_rank(&rows, d).expect("small family");
    label_for(d, rank, sr)
}

fn finish(d: usize, t: Tallies, mode: CensusMode) -> Result<CensusReport> {
    let total = 1u64 << (d * d);
    let singular = total - t.by_rank[d];
    let ExactE { e, g_count, .. } = exact_e(d)?;
    let rows = d <= ROW_VARIANT_LIMIT;
    Ok(CensusReport {
        d,
        total,
        singular,
        by_rank: t.by_rank,
        by_strong_rank: t.by_strong_rank,
        by_class: t.by_class,
        by_class_rows: rows.then_some(t.by_class_rows),
        row_label_mismatches: rows.then_some(t.mismatches),
        n_d: n_threshold(d).n_d,
        g_count,
        e_exact: e,
        ps_exact: BigRational::new(singular.into(), total.into()),
        mode,
        visited: t.visited,
    })
}

fn check_dim(d: usize, limit: usize, operation: &'static str) -> Result<()> {
    if d == 0 {
        return Err(CubeError::InvalidInput("dimension must be positive".into()));
    }
    if d > limit {
        return Err(CubeError::too_large(operation, d, limit));
    }
    Ok(())
}

/// Visits all `2^(d^2)` matrices.
pub fn enumerate_full(d: usize) -> Result<CensusReport> {
    check_dim(d, FULL_LIMIT, "full census")?;
    let total = 1u64 << (d * d);
    let mask = low_mask(d);
    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut t = Tallies::new(d);
            let mut cols = vec![0u64; d];
            for idx in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                for (j, c) in cols.iter_mut().enumerate() {
                    *c = (idx >> (j * d)) & mask;
                }
                let (rank, _) = exact::family_rank(&cols, d);
                let (sr, rl) = if rank == d {
                    (d, ClassLabel::R)
                } else {
                    let sr = structure::strong_rank(&cols, d).expect("small family");
                    (sr, row_label(&cols, d, rank))
                };
                t.record(d, rank, sr, Some(rl), 1);
            }
            t
        })
        .reduce(|| Tallies::new(d), Tallies::merge);
    finish(d, tallies, CensusMode::FullEnumeration)
}

/// Memoized `span(S + c)` for subspaces spanned by cube points.
#[derive(Default)]
struct JoinCache {
    map: FxHashMap<(PointSet, u8), PointSet>,
}

impl JoinCache {
    fn join(&mut self, d: usize, span: PointSet, c: u64) -> PointSet {
        *self.map.entry((span, c as u8)).or_insert_with(|| {
            let mut b = ReducedBasis::default();
            let mut rest = span & !1;
            while rest != 0 {
                let x = rest.trailing_zeros() as u64;
                b.insert(x);
                rest &= rest - 1;
            }
            b.insert(c);
            b.points(d)
        })
    }
}

/// Independent subsets of the columns chosen so far, by size and span.
#[derive(Clone, Default)]
struct Level {
    independent: Vec<(u8, PointSet)>,
    /// Size of the smallest dependent subset found so far (`u8::MAX` if none).
    min_dependent: u8,
    full_span: PointSet,
    rank: u8,
}

struct SymmetricWalk<'a> {
    d: usize,
    factorials: [u64; 8],
    cache: JoinCache,
    tallies: Tallies,
    columns: Vec<u64>,
    levels: &'a mut Vec<Level>,
}

impl SymmetricWalk<'_> {
    fn extend(&mut self, depth: usize, c: u64) -> Level {
        let prev = &self.levels[depth];
        let mut min_dep = prev.min_dependent;
        let mut next: Vec<(u8, PointSet)> = Vec::with_capacity(prev.independent.len() * 2);
        for &(size, span) in &prev.independent {
            if size + 1 >= min_dep {
                continue;
            }
            next.push((size, span));
            if span & (1 << c) != 0 {
                min_dep = size + 1;
            } else {
                next.push((size + 1, self.cache.join(self.d, span, c)));
            }
        }
        next.retain(|&(size, _)| size + 1 < min_dep);
        let (full_span, rank) = if prev.full_span & (1 << c) != 0 {
            (prev.full_span, prev.rank)
        } else {
            (self.cache.join(self.d, prev.full_span, c), prev.rank + 1)
        };
        Level {
            independent: next,
            min_dependent: min_dep,
            full_span,
            rank,
        }
    }

    /// Columns `0..depth` are fixed; picks column `depth` from `start` on.
    fn walk(&mut self, depth: usize, start: u64, run: usize, weight_div: u64) {
        let d = self.d;
        let n = 1u64 << d;
        let last = if depth == 0 {
            None
        } else {
            Some(self.columns[depth - 1])
        };
        for c in start..n {
            let run_c = if last == Some(c) { run + 1 } else { 1 };
            let div = weight_div * run_c as u64;
            if depth + 1 == d {
                let prev = &self.levels[depth];
                let mut min_dep = prev.min_dependent;
                for &(size, span) in &prev.independent {
                    if size + 1 < min_dep && span & (1 << c) != 0 {
                        min_dep = size + 1;
                    }
                }
                let rank = prev.rank as usize + usize::from(prev.full_span & (1 << c) == 0);
                let sr = if min_dep == u8::MAX {
                    d
                } else {
                    min_dep as usize - 1
                };
                self.columns[depth] = c;
                let weight = self.factorials[d] / div;
                let rl = (d <= ROW_VARIANT_LIMIT).then(|| row_label(&self.columns, d, rank));
                self.tallies.record(d, rank, sr, rl, weight);
            } else {
                let next = self.extend(depth, c);
                self.levels[depth + 1] = next;
                self.columns[depth] = c;
                self.walk(depth + 1, c, run_c, div);
            }
        }
    }
}

fn root_level() -> Level {
    Level {
        independent: vec![(0, 1)],
        min_dependent: u8::MAX,
        full_span: 1,
        rank: 0,
    }
}

/// Visits one matrix per multiset of columns, weighted by
/// `d! / prod(multiplicity!)`.
pub fn enumerate_symmetric(d: usize) -> Result<CensusReport> {
    check_dim(d, SYMMETRIC_LIMIT, "symmetric census")?;
    let n = 1u64 << d;
    let mut factorials = [1u64; 8];
    for i in 1..8 {
        factorials[i] = factorials[i - 1] * i as u64;
    }
    let tallies = if d == 1 {
        let mut levels = vec![root_level(); 2];
        let mut w = SymmetricWalk {
            d,
            factorials,
            cache: JoinCache::default(),
            tallies: Tallies::new(d),
            columns: vec![0; d],
            levels: &mut levels,
        };
        w.walk(0, 0, 0, 1);
        w.tallies
    } else {
        // split on the first column for parallelism; caches are per task
        (0..n)
            .into_par_iter()
            .map(|c0| {
                let mut levels = vec![root_level(); d + 1];
                let mut w = SymmetricWalk {
                    d,
                    factorials,
                    cache: JoinCache::default(),
                    tallies: Tallies::new(d),
                    columns: vec![0; d],
                    levels: &mut levels,
                };
                let first = w.extend(0, c0);
                w.levels[1] = first;
                w.columns[0] = c0;
                w.walk(1, c0, 1, 1);
                w.tallies
            })
            .reduce(|| Tallies::new(d), Tallies::merge)
    };
    finish(d, tallies, CensusMode::SortedColumnSymmetry)
}

/// Exact counting identities for the partition, checked against a census.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub d: usize,
    pub g_count: u64,
    pub e_exact: BigRational,
    /// `|R|` from the census and `|G| d! (2^d - E) / d`.
    pub regular: u64,
    pub regular_predicted: BigRational,
    pub regular_holds: bool,
    /// `|S1|` from the census and `|G| d! (d - 1) / 2`.
    pub s1: u64,
    pub s1_predicted: BigRational,
    pub s1_holds: bool,
    /// Every `S1` matrix has no zero column, exactly one repeated pair and
    /// an independent set of distinct columns; and every such matrix is `S1`.
    pub s1_structure_holds: bool,
    /// Rank-`(d-1)` matrices checked for "number of decompositions into an
    /// independent `(d-1)`-set plus one extra column equals `|supp(a)|`".
    pub decompositions_checked: u64,
    pub decompositions_hold: bool,
    /// `|S2| / (|G| d! E / d)`.
    pub ratio_s2: Option<f64>,
    /// `|S1| / |S2|`.
    pub ratio_s1_s2: Option<f64>,
    /// `|S3| / (|S1| / d)`.
    pub ratio_s3: Option<f64>,
    /// `|S4| / ((|S1| + |S2|) / sqrt d)`.
    pub ratio_s4: Option<f64>,
}

impl IdentityCheck {
    pub fn exact_identities_hold(&self) -> bool {
        self.regular_holds && self.s1_holds && self.s1_structure_holds && self.decompositions_hold
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn is_s1_shape(cols: &[u64], d: usize) -> bool {
    if cols.contains(&0) {
        return false;
    }
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &c in cols {
        *counts.entry(c).or_default() += 1;
    }
    let repeated: Vec<usize> = counts.values().copied().filter(|&k| k > 1).collect();
    if repeated != [2] {
        return false;
    }
    let distinct: Vec<u64> = counts.keys().copied().collect();
    exact::is_independent(&distinct, d)
}

/// Checks the exact identities for `|R|` and `|S1|` and the decomposition
/// count behind the `S2` estimate on a full census; the asymptotic
/// relations are reported as ratios only.
pub fn verify_identities(d: usize) -> Result<IdentityCheck> {
    check_dim(d, IDENTITY_LIMIT, "identity check")?;
    if d < 2 {
        return Err(CubeError::InvalidInput("identities need d >= 2".into()));
    }
    let census = enumerate_full(d)?;
    let g = BigRational::from_integer(census.g_count.into());
    let dfact = BigRational::from_integer(factorial(d));
    let dd = BigRational::from_integer(d.into());
    let two_d = BigRational::from_integer((1u64 << d).into());
    let e = census.e_exact.clone();
    let regular_predicted = &g * &dfact * (&two_d - &e) / &dd;
    let s1_predicted = &g * &dfact * BigRational::new(BigInt::from(d - 1), BigInt::from(2));
    let regular = census.regular();
    let s1 = census.by_class.get(ClassLabel::S1);
    let s2 = census.by_class.get(ClassLabel::S2) as f64;
    let s3 = census.by_class.get(ClassLabel::S3) as f64;
    let s4 = census.by_class.get(ClassLabel::S4) as f64;
    let s2_predicted = (&g * &dfact * &e / &dd).to_f64().unwrap_or(f64::NAN);

    let total = 1u64 << (d * d);
    let mask = low_mask(d);
    let mut s1_structure_holds = true;
    let mut decompositions_checked = 0;
    let mut decompositions_hold = true;
    let mut cols = vec![0u64; d];
    for idx in 0..total {
        for (j, c) in cols.iter_mut().enumerate() {
            *c = (idx >> (j * d)) & mask;
        }
        let (rank, _) = exact::family_rank(&cols, d);
        let sr = if rank == d {
            d
        } else {
            structure::strong_rank(&cols, d)?
        };
        let is_s1 = label_for(d, rank, sr) == ClassLabel::S1;
        if is_s1 != (rank + 1 == d && is_s1_shape(&cols, d)) {
            s1_structure_holds = false;
        }
        if rank + 1 == d {
            let m = BinaryMatrix::from_columns(d, cols.clone())?;
            let kernel = structure::kernel_vector(&m)?;
            let decompositions = (0..d)
                .filter(|&k| {
                    let mut rest = cols.clone();
                    rest.remove(k);
                    exact::is_independent(&rest, d)
                })
                .count();
            decompositions_checked += 1;
            if decompositions != kernel.support_size() {
                decompositions_hold = false;
            }
        }
    }

    Ok(IdentityCheck {
        d,
        g_count: census.g_count,
        regular_holds: regular_predicted == BigRational::from_integer(regular.into()),
        s1_holds: s1_predicted == BigRational::from_integer(s1.into()),
        e_exact: e,
        regular,
        regular_predicted,
        s1,
        s1_predicted,
        s1_structure_holds,
        decompositions_checked,
        decompositions_hold,
        ratio_s2: ratio(s2, s2_predicted),
        ratio_s1_s2: ratio(s1 as f64, s2),
        ratio_s3: ratio(s3, s1 as f64 / d as f64),
        ratio_s4: ratio(s4, (s1 as f64 + s2) / (d as f64).sqrt()),
    })
}

/// The exact singular probability as a reduced fraction.
pub fn ps_fraction(report: &CensusReport) -> (BigInt, BigInt) {
    let p = &report.ps_exact;
    (p.numer().clone(), p.denom().clone())
}

impl CensusReport {
    /// Shared fields compare equal (everything except mode and visit count).
    pub fn same_counts(&self, other: &CensusReport) -> bool {
        self.d == other.d
            && self.total == other.total
            && self.singular == other.singular
            && self.by_rank == other.by_rank
            && self.by_strong_rank == other.by_strong_rank
            && self.by_class == other.by_class
            && self.by_class_rows == other.by_class_rows
            && self.row_label_mismatches == other.row_label_mismatches
            && self.g_count == other.g_count
            && self.e_exact == other.e_exact
            && self.ps_exact == other.ps_exact
    }
}
