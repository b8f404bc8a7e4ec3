//! Interval estimates for Monte Carlo results.

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes in `n` trials at critical
/// value `z`. Stays inside [0, 1] and is usable at very small hit counts.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0 && hits <= n);
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp so the point estimate always sits inside despite rounding
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Sample mean and standard error from running sums.
pub fn mean_and_std_err(count: u64, sum: u128, sum_sq: u128) -> (f64, f64) {
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = count as f64;
    let mean = sum as f64 / n;
    if count == 1 {
        return (mean, f64::INFINITY);
    }
    // exact integer variance numerator: n*sum_sq - sum^2
    let num = (count as u128 * sum_sq).saturating_sub(sum * sum) as f64;
    let var = num / (n * (n - 1.0));
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        // 8/10 at 95%: (0.4902, 0.9433)
        let (lo, hi) = wilson_interval(8, 10, Z95);
        assert!((lo - 0.4902).abs() < 1e-4, "{lo}");
        assert!((hi - 0.9433).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100, Z95);
        assert!(lo > 0.95);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(37, 25_000_000, Z95);
        let p = 37.0 / 25e6;
        assert!(lo < p && p < hi && lo > 0.0);
    }

    #[test]
    fn mean_and_error() {
        // values 1, 2, 3
        let (m, se) = mean_and_std_err(3, 6, 14);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
