//! Kolmogorov-Smirnov machinery: the sup-distance statistic, quantiles of the
//! asymptotic Kolmogorov distribution, and pass/fail thresholds.

use crate::{Error, Result};

/// Outcome of a one-sample KS test against a reference CDF.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub sample_size: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub reject: bool,
}

/// Exact sup-distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample contains non-finite values".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Kolmogorov CDF P(K <= x) = 1 - 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2).
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 1..200 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        if term < 1e-12 {
            break;
        }
        sum += if j % 2 == 1 { term } else { -term };
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// K_alpha with P(K <= K_alpha) = 1 - alpha, by bisection on the series.
pub fn kolmogorov_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 0.5], got {alpha}"
        )));
    }
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.1, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rejection threshold K_alpha / sqrt(s) for sample size s.
pub fn ks_threshold(s: usize, alpha: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    Ok(kolmogorov_quantile(alpha)? / (s as f64).sqrt())
}

/// Runs the test at level alpha; rejects when the statistic exceeds the
/// threshold.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<KsResult> {
    let statistic = ks_statistic(samples, cdf)?;
    let threshold = ks_threshold(samples.len(), alpha)?;
    Ok(KsResult {
        statistic,
        sample_size: samples.len(),
        alpha,
        threshold,
        reject: statistic > threshold,
    })
}
