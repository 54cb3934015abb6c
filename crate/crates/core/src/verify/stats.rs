//! Interval estimates over i.i.d. replica statistics.

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Median with a distribution-free order-statistic interval.
pub fn median_ci(xs: &[f64], z: f64) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let med = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    let nf = n as f64;
    let half = 0.5 * z * nf.sqrt();
    let lo = ((0.5 * nf - half).floor() as isize).clamp(0, n as isize - 1) as usize;
    let hi = ((0.5 * nf + half).ceil() as isize).clamp(0, n as isize - 1) as usize;
    Some((med, v[lo], v[hi]))
}

/// Pooled two-proportion z statistic; zero when both samples are degenerate.
pub fn two_proportion_z(k1: usize, n1: usize, k2: usize, n2: usize) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 0.0;
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let p = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        // statsmodels proportion_confint(8, 10, method="wilson")
        let (lo, hi) = wilson(8, 10, 1.959963984540054);
        assert_abs_diff_eq!(lo, 0.49016247153664183, epsilon = 1e-10);
        assert_abs_diff_eq!(hi, 0.9433178485456247, epsilon = 1e-10);
    }

    #[test]
    fn wilson_all_successes_has_upper_one() {
        let (lo, hi) = wilson(200, 200, 1.96);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.98);
    }

    #[test]
    fn mean_se_of_constant_is_zero() {
        let (m, se) = mean_se(&[2.0; 5]);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median_ci(&[3.0, 1.0, 2.0], 1.96).unwrap().0, 2.0);
        assert_eq!(median_ci(&[4.0, 1.0, 2.0, 3.0], 1.96).unwrap().0, 2.5);
    }

    #[test]
    fn two_proportion_z_is_antisymmetric() {
        let z = two_proportion_z(10, 100, 20, 100);
        assert!(z < 0.0);
        assert_abs_diff_eq!(z, -two_proportion_z(20, 100, 10, 100), epsilon = 1e-15);
        assert_eq!(two_proportion_z(0, 50, 0, 50), 0.0);
    }

    proptest! {
        #[test]
        fn wilson_contains_point_estimate(n in 1usize..500, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as usize;
            let (lo, hi) = wilson(k, n, 1.96);
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            prop_assert!(0.0 <= lo && hi <= 1.0);
        }

        #[test]
        fn median_interval_brackets_median(xs in proptest::collection::vec(-10.0f64..10.0, 1..200)) {
            let (m, lo, hi) = median_ci(&xs, 1.96).unwrap();
            prop_assert!(lo <= m && m <= hi);
        }
    }
}
