//! Counting 0/1 points on hyperplanes through the origin.
//!
//! Point counts always include the origin. For a spanning family `G` of
//! `d-1` independent vectors, `v(G)` also includes the members of `G`, so
//! the number of cube points on the plane other than the origin and `G`
//! itself is `v(G) - d` (see [`SpanSummary::extra_points`]).

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Neg, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CubeError, Result};
use crate::exact;
use crate::matrix::{kernel_normal, BinaryMatrix, IntegerVector};
use crate::rng::{Domain, StreamKey};
use crate::stats;
use crate::subspace::{self, PointSet, ReducedBasis};

/// Largest dimension accepted by [`count_points_bruteforce`].
pub const BRUTE_FORCE_LIMIT: usize = 25;
/// Dimensions up to this use brute force inside [`v_of_set`].
pub const MITM_THRESHOLD: usize = 14;
/// Largest dimension accepted by [`exact_e`].
pub const EXACT_E_LIMIT: usize = subspace::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    BruteForce,
    MeetInMiddle,
}

/// Point count on the hyperplane spanned by an independent family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanSummary {
    pub dim: usize,
    pub normal: IntegerVector,
    pub point_count: u64,
    pub method: CountMethod,
}

impl SpanSummary {
    /// Cube points on the plane that are neither the origin nor a member
    /// of the spanning family: `v(G) - d`.
    pub fn extra_points(&self) -> u64 {
        self.point_count - self.dim as u64
    }
}

fn gray_count<T>(a: &[T]) -> u64
where
    T: Zero + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>,
{
    let mut sum = T::zero();
    let mut state = 0u64;
    let mut count = 1; // origin
    for k in 1u64..(1u64 << a.len()) {
        let bit = k.trailing_zeros() as usize;
        state ^= 1 << bit;
        if state & (1 << bit) != 0 {
            sum += &a[bit];
        } else {
            sum -= &a[bit];
        }
        if sum.is_zero() {
            count += 1;
        }
    }
    count
}

/// All `2^n` subset sums, indexed by subset bitmask.
pub(crate) fn subset_sums<T>(a: &[T]) -> Vec<T>
where
    T: Zero + Clone + for<'a> Add<&'a T, Output = T>,
{
    let mut sums = Vec::with_capacity(1 << a.len());
    sums.push(T::zero());
    for x in a {
        let n = sums.len();
        for i in 0..n {
            let s = sums[i].clone() + x;
            sums.push(s);
        }
    }
    sums
}

fn mitm_count<T>(a: &[T]) -> u64
where
    T: Zero + Clone + Ord + for<'a> Add<&'a T, Output = T> + Neg<Output = T>,
{
    let split = a.len().div_ceil(2);
    let mut left = subset_sums(&a[..split]);
    left.sort_unstable();
    subset_sums(&a[split..])
        .into_iter()
        .map(|s| {
            let target = -s;
            let lo = left.partition_point(|x| x.cmp(&target) == Ordering::Less);
            let hi = left.partition_point(|x| x.cmp(&target) != Ordering::Greater);
            (hi - lo) as u64
        })
        .sum()
}

/// Number of `x` in {0,1}^d with `a . x = 0`, by walking all `2^d` points.
pub fn count_points_bruteforce(a: &IntegerVector) -> Result<u64> {
    if a.len() > BRUTE_FORCE_LIMIT {
        return Err(CubeError::too_large(
            "brute-force point count",
            a.len(),
            BRUTE_FORCE_LIMIT,
        ));
    }
    Ok(match a.to_i128_sums() {
        Some(small) => gray_count(&small),
        None => gray_count::<BigInt>(a.entries()),
    })
}

/// Same count as [`count_points_bruteforce`] by splitting the coordinates
/// in halves and matching sorted partial sums: `O(2^(d/2) d)` time and
/// `2^ceil(d/2)` memory.
pub fn count_points_mitm(a: &IntegerVector) -> u64 {
    match a.to_i128_sums() {
        Some(small) => mitm_count(&small),
        None => mitm_count::<BigInt>(a.entries()),
    }
}

/// Point count with the method chosen by dimension.
pub fn count_points(a: &IntegerVector) -> (u64, CountMethod) {
    if a.len() <= MITM_THRESHOLD {
        (
            count_points_bruteforce(a).expect("below brute-force limit"),
            CountMethod::BruteForce,
        )
    } else {
        (count_points_mitm(a), CountMethod::MeetInMiddle)
    }
}

/// `v(G)` for a family `G` of `d-1` independent vectors, given as the
/// columns of a `d x (d-1)` matrix.
pub fn v_of_set(g: &BinaryMatrix) -> Result<SpanSummary> {
    let d = g.rows();
    if g.cols() + 1 != d {
        return Err(CubeError::InvalidInput(format!(
            "a spanning family in dimension {d} has {} vectors, expected {}",
            g.cols(),
            d - 1
        )));
    }
    let (rank, _) = exact::family_rank(g.columns(), d);
    if rank < d - 1 {
        return Err(CubeError::NotIndependent {
            rank,
            count: g.cols(),
        });
    }
    let normal = kernel_normal(g)?;
    let (point_count, method) = count_points(&normal);
    Ok(SpanSummary {
        dim: d,
        normal,
        point_count,
        method,
    })
}

/// Exact expectation of `v(G)` over the independent `(d-1)`-sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactE {
    pub dim: usize,
    pub e: BigRational,
    /// `|G|`: number of unordered independent `(d-1)`-subsets.
    pub g_count: u64,
    /// `sum over G of v(G)`.
    pub point_sum: u64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    sets: u64,
    points: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;
    fn add(self, o: Tally) -> Tally {
        Tally {
            sets: self.sets + o.sets,
            points: self.points + o.points,
        }
    }
}

/// Enumerates sorted independent families. At depth `d-2` the remaining
/// vectors are grouped by the hyperplane they span together with the
/// current family, since every point off a codimension-2 subspace lies on
/// exactly one hyperplane through it.
fn e_dfs(d: usize, start: u64, basis: &ReducedBasis, span: PointSet) -> Tally {
    let n = 1u64 << d;
    let mut tally = Tally::default();
    if basis.dim() + 2 == d {
        let candidates = subspace::indices_from(start, d) & !span;
        let mut covered = span;
        for c in start..n {
            if covered & (1 << c) != 0 {
                continue;
            }
            let mut b = basis.clone();
            b.insert(c);
            let plane = b.points(d);
            let members = (plane & candidates).count_ones() as u64;
            tally.sets += members;
            tally.points += members * plane.count_ones() as u64;
            covered |= plane;
        }
        return tally;
    }
    for c in start..n {
        if span & (1 << c) != 0 {
            continue;
        }
        let mut b = basis.clone();
        b.insert(c);
        let next = b.points(d);
        tally = tally + e_dfs(d, c + 1, &b, next);
    }
    tally
}

/// Exact `E(d)` and `|G|` by enumerating every independent `(d-1)`-subset
/// of the nonzero cube points. Families are unordered sets; since `v` is
/// symmetric the mean is the same over ordered tuples. The enumeration
/// visits about `C(2^d, d-2)` nodes, so `d = 7` takes a long time.
pub fn exact_e(d: usize) -> Result<ExactE> {
    if d == 0 {
        return Err(CubeError::InvalidInput("dimension must be positive".into()));
    }
    if d > EXACT_E_LIMIT {
        return Err(CubeError::too_large("exact E(d)", d, EXACT_E_LIMIT));
    }
    let tally = if d == 1 {
        // the empty family spans the origin only
        Tally { sets: 1, points: 1 }
    } else if d == 2 {
        e_dfs(d, 1, &ReducedBasis::default(), 1)
    } else {
        (1u64..(1 << d))
            .into_par_iter()
            .map(|c| {
                let mut b = ReducedBasis::default();
                b.insert(c);
                let span = b.points(d);
                e_dfs(d, c + 1, &b, span)
            })
            .reduce(Tally::default, |a, b| a + b)
    };
    Ok(ExactE {
        dim: d,
        e: BigRational::new(tally.points.into(), tally.sets.into()),
        g_count: tally.sets,
        point_sum: tally.points,
    })
}

/// Monte Carlo estimate of `E(d)`: families of `d-1` uniform vectors are
/// drawn per sample index and dependent draws are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanEstimate {
    pub dim: usize,
    pub samples: u64,
    pub seed: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub rejection_rate: f64,
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub wall_time: f64,
}

/// Estimates `E(d)`; the result depends only on `(d, samples, seed)`.
pub fn sample_e(d: usize, samples: u64, seed: u64, workers: usize) -> Result<SpanEstimate> {
    if samples == 0 {
        return Err(CubeError::InvalidInput("samples must be at least 1".into()));
    }
    if !(2..=crate::matrix::MAX_ROWS).contains(&d) {
        return Err(CubeError::InvalidInput(format!(
            "dimension must be in 2..={}, got {d}",
            crate::matrix::MAX_ROWS
        )));
    }
    let started = std::time::Instant::now();
    let key = StreamKey::new(seed, Domain::SpanFamily, d);
    let draw = |i: u64| -> Option<u64> {
        let mut s = key.stream(i);
        let cols: Vec<u64> = (0..d - 1).map(|_| s.next_bits(d)).collect();
        if !exact::is_independent(&cols, d) {
            return None;
        }
        let g = BinaryMatrix::from_columns(d, cols).expect("bits within rows");
        Some(v_of_set(&g).expect("independent family").point_count)
    };
    let (accepted, sum, sum_sq) = crate::parallel::install(workers, || {
        (0..samples)
            .into_par_iter()
            .filter_map(draw)
            .map(|v| (1u64, v as u128, (v as u128) * (v as u128)))
            .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
    });
    let rejected = samples - accepted;
    let (mean, std_err) = stats::mean_and_std_err(accepted, sum, sum_sq);
    let half = stats::Z95 * std_err;
    Ok(SpanEstimate {
        dim: d,
        samples,
        seed,
        accepted,
        rejected,
        rejection_rate: rejected as f64 / samples as f64,
        mean,
        std_err,
        ci_low: mean - half,
        ci_high: mean + half,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> IntegerVector {
        IntegerVector::from(v.to_vec())
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_points_bruteforce(&iv(&[1, -1])).unwrap(), 2);
        assert_eq!(count_points_bruteforce(&iv(&[0, 0, 1])).unwrap(), 4);
        assert_eq!(count_points_bruteforce(&iv(&[1, 1, -1])).unwrap(), 3);
        assert_eq!(count_points_mitm(&iv(&[1, -1])), 2);
        assert_eq!(count_points_mitm(&iv(&[0, 0, 1])), 4);
        assert_eq!(count_points_mitm(&iv(&[1, 1, -1])), 3);
    }

    #[test]
    fn brute_force_guard() {
        let a = iv(&[1; 26]);
        assert!(matches!(
            count_points_bruteforce(&a),
            Err(CubeError::DimensionTooLarge {
                dim: 26,
                limit: 25,
                ..
            })
        ));
    }

    #[test]
    fn huge_entries_use_bigint_path() {
        let big: BigInt = BigInt::from(1u8) << 200;
        let a = IntegerVector(vec![big.clone(), -big.clone(), big, BigInt::from(1)]);
        // empty set, {0, 1} and {1, 2}
        assert_eq!(count_points_bruteforce(&a).unwrap(), 3);
        assert_eq!(count_points_mitm(&a), 3);
    }

    #[test]
    fn v_of_set_examples() {
        let g = BinaryMatrix::from_columns(3, vec![0b001, 0b010]).unwrap();
        assert_eq!(v_of_set(&g).unwrap().point_count, 4);
        let g = BinaryMatrix::from_columns(3, vec![0b011, 0b101]).unwrap();
        let s = v_of_set(&g).unwrap();
        assert_eq!(s.point_count, 3);
        assert_eq!(s.extra_points(), 0);
        let g = BinaryMatrix::from_columns(2, vec![0b11]).unwrap();
        assert_eq!(v_of_set(&g).unwrap().point_count, 2);
    }

    #[test]
    fn v_of_set_errors() {
        let g = BinaryMatrix::from_columns(3, vec![0b011, 0b011]).unwrap();
        assert_eq!(
            v_of_set(&g),
            Err(CubeError::NotIndependent { rank: 1, count: 2 })
        );
        let g = BinaryMatrix::from_columns(3, vec![0b011]).unwrap();
        assert!(matches!(v_of_set(&g), Err(CubeError::InvalidInput(_))));
    }

    #[test]
    fn exact_e_small() {
        let e1 = exact_e(1).unwrap();
        assert_eq!((e1.g_count, e1.point_sum), (1, 1));
        let e2 = exact_e(2).unwrap();
        assert_eq!(e2.g_count, 3);
        assert_eq!(e2.e, BigRational::from_integer(2.into()));
        let e3 = exact_e(3).unwrap();
        assert_eq!(e3.g_count, 21);
        assert_eq!(e3.e, BigRational::new(27.into(), 7.into()));
        assert!(matches!(
            exact_e(8),
            Err(CubeError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn sample_e_is_deterministic() {
        let a = sample_e(4, 500, 11, 1).unwrap();
        let b = sample_e(4, 500, 11, 3).unwrap();
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.accepted + a.rejected, 500);
    }
}
