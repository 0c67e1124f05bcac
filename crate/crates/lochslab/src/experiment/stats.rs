//! Small self-contained statistics toolbox: normal CDF, goodness-of-fit
//! distance, moments, and percentiles.
//!
//! The normal CDF is built from the error function: a Maclaurin series on
//! `|x| < 2` and a backward-evaluated continued fraction for the complement
//! on the tail.  Both pieces are accurate to well under 1e-12 over the range
//! used here, which is orders of magnitude below any decision threshold the
//! experiments apply.

/// 2/sqrt(pi).
const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_6;
/// 1/sqrt(pi).
const ONE_OVER_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Error function via its Maclaurin series; converges fast for `|x| < 2`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        let nf = n as f64;
        term *= -x2 / nf;
        let add = term / (2.0 * nf + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum * TWO_OVER_SQRT_PI
}

/// Complementary error function for `x >= 2` via the classical continued
/// fraction `exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))))`,
/// evaluated backward.
fn erfc_fraction(x: f64) -> f64 {
    let mut tail = 0.0f64;
    for k in (1..=80u32).rev() {
        tail = (k as f64 / 2.0) / (x + tail);
    }
    (-x * x).exp() * ONE_OVER_SQRT_PI / (x + tail)
}

/// Error function on the whole line.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.0 {
        erf_series(x)
    } else {
        1.0 - erfc_fraction(x)
    }
}

/// Complementary error function on the whole line.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and the
/// standard normal.  `values` need not be sorted.
pub fn ks_distance_normal(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
    let n = v.len();
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = normal_cdf(x);
        let hi = (i + 1) as f64 / nf - f;
        let lo = f - i as f64 / nf;
        d = d.max(hi).max(lo);
    }
    d
}

/// Sample mean and (population) variance.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Nearest-rank percentile, `p` in `[0, 100]`.  `values` need not be sorted.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty sample");
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
    let n = v.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    v[rank.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_matches_reference_points() {
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-13);
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-13);
        assert!((erf(-1.0) + 0.842_700_792_949_714_9).abs() < 1e-13);
        assert!(erf(0.0) == 0.0);
    }

    #[test]
    fn erfc_matches_reference_points() {
        assert!((erfc(2.0) - 0.004_677_734_981_047_265).abs() < 1e-14);
        assert!((erfc(3.0) - 2.209_049_699_858_543_8e-5).abs() < 1e-17);
        assert!((erfc(-2.0) - 1.995_322_265_018_937).abs() < 1e-12);
        // Series and fraction halves agree where they meet.
        assert!((erfc(1.999) - (1.0 - erf(1.999))).abs() < 1e-14);
        assert!(((1.0 - erf_series(2.0)) - erfc_fraction(2.0)).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_matches_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-12);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_484).abs() < 1e-12);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-4.0) - 3.167_124_183_311_996_5e-5).abs() < 1e-17);
    }

    #[test]
    fn ks_distance_hand_computed() {
        // For {-1, 0, 1}: the largest gap is 1/3 - Phi(-1) = Phi(1) - 2/3.
        let d = ks_distance_normal(&[1.0, -1.0, 0.0]);
        let expected = 1.0 / 3.0 - normal_cdf(-1.0);
        assert!((d - expected).abs() < 1e-12, "d {d} expected {expected}");
        // A sample at exact normal quantiles has tiny distance.
        let grid: Vec<f64> = vec![-1.2815515655446004, -0.5244005127080407, 0.0,
            0.5244005127080407, 1.2815515655446004];
        // Quantiles at (i+0.5)/5 for i = 0..5 -> D = 0.1.
        let d = ks_distance_normal(&grid);
        assert!((d - 0.1).abs() < 1e-9, "d {d}");
    }

    #[test]
    fn moments_and_percentiles() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let (m, var) = mean_var(&v);
        assert!((m - 5.0).abs() < 1e-15);
        assert!((var - 4.0).abs() < 1e-15);
        assert_eq!(percentile(&v, 50.0), 4.0);
        assert_eq!(percentile(&v, 100.0), 9.0);
        assert_eq!(percentile(&v, 0.0), 2.0);
        assert_eq!(percentile(&v, 99.0), 9.0);
    }
}
