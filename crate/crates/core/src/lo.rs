//! Littlewood-Offord anti-concentration bounds, an exhaustive verifier for
//! them, the strong-rank tail sum, and reference probability curves.
//!
//! Two forms of the bound are exposed. For nonzero reals `a_1..a_n` and
//! signs `e_i` in {-1,+1}, at most `C(n, floor(n/2))` of the sums
//! `sum e_i a_i` fall in any open interval of length 2
//! ([`lo_interval_bound`]). For 0/1 coefficients and a vector with `t`
//! nonzero entries, at most `C(t, floor(t/2)) 2^(n-t)` of the `2^n` sums
//! share one value ([`lo_level_bound`]); hyperplane point counts are the
//! special case of the value 0.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CubeError, Result};
use crate::matrix::IntegerVector;
use crate::span::subset_sums;
use crate::structure::raw_threshold;

/// Largest vector length accepted by [`max_level_multiplicity`].
pub const LEVEL_LIMIT: usize = 24;

fn central_binomial(n: usize) -> BigUint {
    binomial(BigUint::from(n), BigUint::from(n / 2))
}

/// `C(n, floor(n/2))`.
pub fn lo_interval_bound(n: usize) -> BigUint {
    central_binomial(n)
}

/// `C(t, floor(t/2)) * 2^(n-t)`.
pub fn lo_level_bound(n: usize, t: usize) -> Result<BigUint> {
    if t > n {
        return Err(CubeError::InvalidInput(format!(
            "support size {t} exceeds length {n}"
        )));
    }
    Ok(central_binomial(t) << (n - t))
}

/// A most frequent 0/1-combination sum and how often it occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMultiplicity {
    pub value: BigInt,
    pub multiplicity: u64,
}

fn check_len(a: &IntegerVector) -> Result<()> {
    if a.len() > LEVEL_LIMIT {
        return Err(CubeError::too_large(
            "level multiplicity",
            a.len(),
            LEVEL_LIMIT,
        ));
    }
    Ok(())
}

/// Runs of equal values in the sorted subset sums.
fn runs<T>(a: &[T]) -> Vec<(T, u64)>
where
    T: Ord + Clone + Zero + for<'a> std::ops::Add<&'a T, Output = T>,
{
    let mut sums = subset_sums(a);
    sums.sort_unstable();
    let mut out: Vec<(T, u64)> = Vec::new();
    for s in sums {
        match out.last_mut() {
            Some((v, c)) if *v == s => *c += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

/// Level counts by dynamic programming over the value range, when that
/// range is narrower than the number of subsets.
fn dense_runs(a: &[i128]) -> Option<Vec<(i128, u64)>> {
    let span: i128 = a.iter().map(|x| x.abs()).sum();
    if span >= 1 << a.len().min(24) {
        return None;
    }
    let low: i128 = a.iter().filter(|&&x| x < 0).sum();
    let mut counts = vec![0u64; span as usize + 1];
    // index i holds value low + i; start from the empty sum
    counts[(-low) as usize] = 1;
    for &x in a {
        let k = x.unsigned_abs() as usize;
        if x > 0 {
            for i in (k..counts.len()).rev() {
                counts[i] += counts[i - k];
            }
        } else if x < 0 {
            for i in 0..counts.len() - k {
                counts[i] += counts[i + k];
            }
        } else {
            counts.iter_mut().for_each(|c| *c *= 2);
        }
    }
    Some(
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (low + i as i128, c))
            .collect(),
    )
}

fn small_runs(a: &[i128]) -> Vec<(i128, u64)> {
    dense_runs(a).unwrap_or_else(|| runs(a))
}

fn most_frequent<T>(hist: Vec<(T, u64)>) -> (T, u64) {
    hist.into_iter()
        .fold(None::<(T, u64)>, |best, (v, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((v, c)),
        })
        .expect("at least the empty sum")
}

/// Distinct values of `sum e_i a_i` over `e` in {0,1}^n with their
/// multiplicities, in increasing order of value.
pub fn level_histogram(a: &IntegerVector) -> Result<Vec<(BigInt, u64)>> {
    check_len(a)?;
    Ok(match a.to_i128_sums() {
        Some(small) => small_runs(&small)
            .into_iter()
            .map(|(v, c)| (BigInt::from(v), c))
            .collect(),
        None => runs(a.entries()),
    })
}

/// Tallies all `2^n` subset sums and returns the most frequent value (the
/// smallest one on ties).
pub fn max_level_multiplicity(a: &IntegerVector) -> Result<LevelMultiplicity> {
    check_len(a)?;
    let (value, multiplicity) = match a.to_i128_sums() {
        Some(small) => {
            let (v, c) = most_frequent(small_runs(&small));
            (BigInt::from(v), c)
        }
        None => most_frequent(runs(a.entries())),
    };
    Ok(LevelMultiplicity {
        value,
        multiplicity,
    })
}

/// A nonnegative dyadic rational `numerator / 2^exponent`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub numerator: BigUint,
    pub exponent: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `log10` of the value; `-inf` for zero.
    pub fn log10(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.numerator.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.numerator >> shift).to_f64().expect("fits in f64");
        (top.log2() + shift as f64 - self.exponent as f64) * std::f64::consts::LOG10_2
    }

    /// Exact test of `self * factor * 2^k <= 1`.
    fn scaled_at_most_one(&self, factor: usize, k: u64) -> bool {
        let lhs = (&self.numerator * BigUint::from(factor)) << k;
        lhs <= BigUint::one() << self.exponent
    }

    /// Mantissa and base-10 exponent for display, e.g. `(1.23, -45)`.
    pub fn scientific(&self) -> (f64, i64) {
        if self.is_zero() {
            return (0.0, 0);
        }
        let l = self.log10();
        let e = l.floor();
        (10f64.powf(l - e), e as i64)
    }
}

/// One summand of the strong-rank tail sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaTerm {
    pub k: usize,
    pub value: Dyadic,
    /// `log10(term * d * 2^d)`; the per-term bound asks for `<= 0`.
    pub log10_ratio_to_term_bound: f64,
    pub within_term_bound: bool,
}

/// The sum over `k = 3..=floor(d - 3d/ln d)` of
/// `C(d,k) C(d,k+1) (2^-k C(k, floor(k/2)))^(d-k)`, evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSum {
    pub d: usize,
    /// Upper summation limit, `floor(d - 3d / ln d)` (unclamped).
    pub upper: i64,
    pub value: Dyadic,
    pub log10_value: f64,
    /// `value <= 2^-d`.
    pub within_bound: bool,
    /// Every summand `<= 1 / (d 2^d)`.
    pub terms_within_bound: bool,
    pub largest_term: Option<LemmaTerm>,
    pub terms: Vec<LemmaTerm>,
}

fn lemma_term(d: usize, k: usize) -> Dyadic {
    let bd = BigUint::from(d);
    let numerator = binomial(bd.clone(), BigUint::from(k))
        * binomial(bd, BigUint::from(k + 1))
        * central_binomial(k).pow((d - k) as u32);
    Dyadic {
        numerator,
        exponent: (k * (d - k)) as u64,
    }
}

/// Exact evaluation of the strong-rank tail sum for dimension `d`. An
/// empty range (upper limit below 3) gives 0.
pub fn lemma_sum(d: usize) -> Result<LemmaSum> {
    if d < 3 {
        return Err(CubeError::InvalidInput(format!(
            "lemma sum needs d >= 3, got {d}"
        )));
    }
    let upper = raw_threshold(d).expect("d >= 2");
    let terms: Vec<LemmaTerm> = if upper >= 3 {
        (3..=upper as usize)
            .map(|k| {
                let value = lemma_term(d, k);
                let within = value.scaled_at_most_one(d, d as u64);
                let ratio =
                    value.log10() + (d as f64).log10() + d as f64 * std::f64::consts::LOG10_2;
                LemmaTerm {
                    k,
                    value,
                    log10_ratio_to_term_bound: ratio,
                    within_term_bound: within,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let value = match terms.iter().map(|t| t.value.exponent).max() {
        None => Dyadic::zero(),
        Some(exponent) => Dyadic {
            numerator: terms
                .iter()
                .map(|t| &t.value.numerator << (exponent - t.value.exponent))
                .sum(),
            exponent,
        },
    };
    let within_bound = value.scaled_at_most_one(1, d as u64);
    let largest_term = terms
        .iter()
        .max_by(|a, b| a.value.log10().total_cmp(&b.value.log10()))
        .cloned();
    Ok(LemmaSum {
        d,
        upper,
        log10_value: value.log10(),
        within_bound,
        terms_within_bound: terms.iter().all(|t| t.within_term_bound),
        largest_term,
        terms,
        value,
    })
}

/// Result of scanning [`lemma_sum`] over a range of dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaScan {
    pub from: usize,
    pub to: usize,
    /// Smallest `d` with a nonempty sum.
    pub first_nonempty: Option<usize>,
    /// Smallest `d` with a nonempty sum from which `lemma_sum(d) <= 2^-d`
    /// holds for every `d` up to `to`.
    pub holds_from: Option<usize>,
    /// Dimensions with a nonempty sum where the inequality fails.
    pub failures: usize,
    /// `(d, log10(lemma_sum(d) * 2^d))` for each scanned nonempty `d`.
    pub log10_excess: Vec<(usize, f64)>,
}

pub fn lemma_scan(from: usize, to: usize) -> Result<LemmaScan> {
    let mut first_nonempty = None;
    let mut holds_from = None;
    let mut failures = 0;
    let mut log10_excess = Vec::new();
    for d in from.max(3)..=to {
        let s = lemma_sum(d)?;
        if s.terms.is_empty() {
            continue;
        }
        first_nonempty.get_or_insert(d);
        log10_excess.push((d, s.log10_value + d as f64 * std::f64::consts::LOG10_2));
        if s.within_bound {
            holds_from.get_or_insert(d);
        } else {
            failures += 1;
            holds_from = None;
        }
    }
    Ok(LemmaScan {
        from,
        to,
        first_nonempty,
        holds_from,
        failures,
        log10_excess,
    })
}

/// KKS exponential-decay constant.
pub const KKS_EPSILON: f64 = 0.001;

/// Reference curves for singularity probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCurves {
    pub d: usize,
    /// `d^2 / 2^d`.
    pub conjecture: f64,
    /// `(1 - 0.001)^d`.
    pub kks: f64,
    /// `(3/4)^d`.
    pub tao_vu: f64,
    /// `d^2 / 2^(d+1)`.
    pub pair_collision: f64,
}

pub fn reference_curves(d: usize) -> ReferenceCurves {
    let df = d as f64;
    let conjecture = df * df * (-df).exp2();
    ReferenceCurves {
        d,
        conjecture,
        kks: (1.0 - KKS_EPSILON).powf(df),
        tao_vu: 0.75f64.powf(df),
        pair_collision: conjecture / 2.0,
    }
}
