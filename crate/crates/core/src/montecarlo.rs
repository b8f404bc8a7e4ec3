//! Monte Carlo estimation of the singular probability, the comparison
//! against the `E(d)` approximation, and the table of probabilities by
//! dimension.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{self, CensusMode};
use crate::error::{CubeError, Result};
use crate::exact;
use crate::matrix::MAX_ROWS;
use crate::rng::{Domain, StreamKey};
use crate::span;
use crate::stats::{self, Z95};

/// Default sample count per dimension.
pub const DEFAULT_SAMPLES: u64 = 25_000_000;
/// Largest dimension accepted by [`reproduce_table`].
pub const TABLE_LIMIT: usize = 30;
/// Largest dimension with an exact [`theorem1_report`].
pub const THEOREM1_EXACT_LIMIT: usize = census::FULL_LIMIT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub d: usize,
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub wall_time: f64,
}

fn check_sampling_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(CubeError::InvalidInput("dimension must be positive".into()));
    }
    if d > MAX_ROWS {
        return Err(CubeError::too_large("sampling", d, MAX_ROWS));
    }
    Ok(())
}

/// Counts singular matrices among `samples` uniform draws. The matrix for
/// sample `i` depends only on `(seed, d, i)`, so `hits` does not depend on
/// `workers`.
pub fn estimate_ps(d: usize, samples: u64, seed: u64, workers: usize) -> Result<McEstimate> {
    check_sampling_dim(d)?;
    if samples == 0 {
        return Err(CubeError::InvalidInput("samples must be at least 1".into()));
    }
    let started = Instant::now();
    let key = StreamKey::new(seed, Domain::Singularity, d);
    let singular = |i: u64| -> bool {
        let mut s = key.stream(i);
        let mut cols = [0u64; MAX_ROWS];
        for c in cols[..d].iter_mut() {
            *c = s.next_bits(d);
        }
        exact::family_rank(&cols[..d], d).0 < d
    };
    let hits = crate::parallel::install(workers, || {
        (0..samples)
            .into_par_iter()
            .filter(|&i| singular(i))
            .count() as u64
    });
    let (ci_low, ci_high) = stats::wilson_interval(hits, samples, Z95);
    Ok(McEstimate {
        d,
        samples,
        hits,
        estimate: hits as f64 / samples as f64,
        ci_low,
        ci_high,
        seed,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// An exact value or a sampled one.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Exact(BigRational),
    Estimate(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Quantity::Estimate(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Estimate(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    Exact,
    Sampled,
}

/// Sampling parameters for the sampled modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

/// `P_s(d)` next to `E(d)/2^d + d^2/2^(d+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub d: usize,
    pub mode: ReportMode,
    pub lhs: Quantity,
    pub e_value: Quantity,
    pub rhs: Quantity,
    pub ratio: Quantity,
}

fn pow2(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(1) << k)
}

/// `E/2^d + d^2/2^(d+1)` over the rationals.
pub fn theorem1_rhs(d: usize, e: &BigRational) -> BigRational {
    let dd = BigRational::from_integer(BigInt::from(d * d));
    e / pow2(d) + dd / pow2(d + 1)
}

pub fn theorem1_report(d: usize, mode: ReportMode, sampling: Sampling) -> Result<Theorem1Report> {
    match mode {
        ReportMode::Exact => {
            if d == 0 {
                return Err(CubeError::InvalidInput("dimension must be positive".into()));
            }
            if d > THEOREM1_EXACT_LIMIT {
                return Err(CubeError::too_large(
                    "exact theorem report",
                    d,
                    THEOREM1_EXACT_LIMIT,
                ));
            }
            let report = census::enumerate_symmetric(d)?;
            let lhs = report.ps_exact.clone();
            let e = report.e_exact.clone();
            let rhs = theorem1_rhs(d, &e);
            let ratio = &lhs / &rhs;
            Ok(Theorem1Report {
                d,
                mode,
                lhs: Quantity::Exact(lhs),
                e_value: Quantity::Exact(e),
                rhs: Quantity::Exact(rhs),
                ratio: Quantity::Exact(ratio),
            })
        }
        ReportMode::Sampled => {
            if d < 2 {
                return Err(CubeError::InvalidInput(
                    "sampled report needs d >= 2".into(),
                ));
            }
            let ps = estimate_ps(d, sampling.samples, sampling.seed, sampling.workers)?;
            let e = span::sample_e(d, sampling.samples, sampling.seed, sampling.workers)?;
            let dd = (d * d) as f64;
            let rhs = e.mean / 2f64.powi(d as i32) + dd / 2f64.powi(d as i32 + 1);
            Ok(Theorem1Report {
                d,
                mode,
                lhs: Quantity::Estimate(ps.estimate),
                e_value: Quantity::Estimate(e.mean),
                rhs: Quantity::Estimate(rhs),
                ratio: Quantity::Estimate(ps.estimate / rhs),
            })
        }
    }
}

/// How a table row was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowMode {
    Exact,
    MonteCarlo,
}

/// One row: matrices examined, singular count, probability, `d^2/2^d` and
/// the probability scaled by `2^d/d^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub d: usize,
    pub matrices: u128,
    pub singular: u128,
    pub probability: f64,
    /// Present on exact rows.
    pub exact: Option<BigRational>,
    pub curve: BigRational,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mode: RowMode,
    pub seed: Option<u64>,
}

impl TableRow {
    /// Probability with 7 decimals.
    pub fn probability_text(&self) -> String {
        match &self.exact {
            Some(r) => format_rational(r, 7),
            None => format!("{:.7}", self.probability),
        }
    }

    /// `d^2/2^d` with 6 decimals, or 7 below 0.1.
    pub fn curve_text(&self) -> String {
        let tenth = BigRational::new(1.into(), 10.into());
        let places = if self.curve >= tenth { 6 } else { 7 };
        format_rational(&self.curve, places)
    }

    /// Scaled probability with 3 decimals.
    pub fn ratio_text(&self) -> String {
        match &self.exact {
            Some(r) => format_rational(&(r / &self.curve), 3),
            None => format!("{:.3}", self.ratio),
        }
    }
}

/// Decimal rendering of `r` rounded half to even at `places` digits.
pub fn format_rational(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10).pow(places as u32);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let (q, rem): (BigInt, BigInt) = scaled.numer().div_rem(scaled.denom());
    let twice: BigInt = rem * 2;
    let mut q = q;
    match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => q += 1,
        std::cmp::Ordering::Equal if q.is_odd() => q += 1,
        _ => {}
    }
    let (int, frac) = q.div_rem(&scale);
    let sign = if r.is_negative() && !q.is_zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac:0>places$}")
    }
}

/// Rows for `d_min..=d_max`: exact up to `exact_max` (via the census),
/// sampled above it.
pub fn reproduce_table(
    d_min: usize,
    d_max: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    exact_max: usize,
) -> Result<Vec<TableRow>> {
    if d_min == 0 || d_min > d_max {
        return Err(CubeError::InvalidInput(format!(
            "bad dimension range {d_min}..={d_max}"
        )));
    }
    if d_max > TABLE_LIMIT {
        return Err(CubeError::too_large("table", d_max, TABLE_LIMIT));
    }
    if exact_max > census::SYMMETRIC_LIMIT {
        return Err(CubeError::too_large(
            "exact table rows",
            exact_max,
            census::SYMMETRIC_LIMIT,
        ));
    }
    let mut rows = Vec::new();
    for d in d_min..=d_max {
        let curve = BigRational::new(BigInt::from(d * d), BigInt::from(1) << d);
        let curve_f = curve.to_f64().unwrap_or(f64::NAN);
        if d <= exact_max {
            let report = census::enumerate_symmetric(d)?;
            debug_assert_eq!(report.mode, CensusMode::SortedColumnSymmetry);
            let p = report.ps_exact.clone();
            let pf = p.to_f64().unwrap_or(f64::NAN);
            rows.push(TableRow {
                d,
                matrices: report.total as u128,
                singular: report.singular as u128,
                probability: pf,
                ratio: (&p / &curve).to_f64().unwrap_or(f64::NAN),
                exact: Some(p),
                curve,
                ci_low: pf,
                ci_high: pf,
                mode: RowMode::Exact,
                seed: None,
            });
        } else {
            let est = estimate_ps(d, samples, seed, workers)?;
            rows.push(TableRow {
                d,
                matrices: samples as u128,
                singular: est.hits as u128,
                probability: est.estimate,
                exact: None,
                curve,
                ratio: est.estimate / curve_f,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                mode: RowMode::MonteCarlo,
                seed: Some(seed),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&q(338, 512), 7), "0.6601562");
        assert_eq!(format_rational(&q(100, 1024), 7), "0.0976562");
        assert_eq!(format_rational(&q(1, 2), 7), "0.5000000");
        assert_eq!(format_rational(&q(9, 8), 6), "1.125000");
        assert_eq!(format_rational(&q(3, 2), 0), "2");
        assert_eq!(format_rational(&q(-1, 3), 3), "-0.333");
        assert_eq!(format_rational(&q(15, 1), 2), "15.00");
    }

    #[test]
    fn estimate_is_worker_independent() {
        let a = estimate_ps(6, 20_000, 7, 1).unwrap();
        let b = estimate_ps(6, 20_000, 7, 3).unwrap();
        assert_eq!(a.hits, b.hits);
        assert!(a.ci_low <= a.estimate && a.estimate <= a.ci_high);
    }

    #[test]
    fn theorem1_exact_small() {
        let s = Sampling {
            samples: 1,
            seed: 0,
            workers: 0,
        };
        let r = theorem1_report(3, ReportMode::Exact, s).unwrap();
        assert_eq!(r.lhs, Quantity::Exact(q(338, 512)));
        assert_eq!(r.e_value, Quantity::Exact(q(27, 7)));
        assert_eq!(r.rhs, Quantity::Exact(q(27, 56) + q(9, 16)));
        let r = theorem1_report(2, ReportMode::Exact, s).unwrap();
        assert_eq!(r.rhs, Quantity::Exact(q(1, 1)));
        assert!(matches!(
            theorem1_report(6, ReportMode::Exact, s),
            Err(CubeError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn table_first_rows() {
        let rows = reproduce_table(1, 3, 10, 1, 0, 5).unwrap();
        let text: Vec<_> = rows
            .iter()
            .map(|r| {
                (
                    r.singular,
                    r.probability_text(),
                    r.curve_text(),
                    r.ratio_text(),
                )
            })
            .collect();
        assert_eq!(
            text[0],
            (1, "0.5000000".into(), "0.500000".into(), "1.000".into())
        );
        assert_eq!(
            text[1],
            (10, "0.6250000".into(), "1.000000".into(), "0.625".into())
        );
        assert_eq!(
            text[2],
            (338, "0.6601562".into(), "1.125000".into(), "0.587".into())
        );
        assert!(reproduce_table(1, 31, 10, 1, 0, 5).is_err());
    }
}
