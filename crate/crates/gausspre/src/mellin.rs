//! Mellin transforms of the half-normal and half-Weibull laws, their ratio,
//! and the Laguerre-series numerical inversion.
//!
//! The inversion is a diagnostic: the coefficient sequence is computed so
//! that its numerical breakdown can be observed and reported. Nothing in the
//! activation-construction path consumes it.

use crate::special::ln_gamma;
use crate::{Error, Result};

/// Mellin transform of the half-normal density:
/// (M f_|G|)(s) = 2^((s-1)/2) Gamma(s/2) / sqrt(pi).
pub fn mellin_half_normal(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be > 0, got {s}")));
    }
    Ok((0.5 * (s - 1.0) * 2f64.ln() + ln_gamma(0.5 * s) - 0.5 * std::f64::consts::PI.ln()).exp())
}

/// Mellin transform of the half-Weibull density:
/// (M f_|W|)(s) = Gamma((s-1)/theta + 1).
pub fn mellin_half_weibull(s: f64, theta: f64) -> Result<f64> {
    let a = (s - 1.0) / theta + 1.0;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma argument {a} <= 0 (pole region)"
        )));
    }
    Ok(ln_gamma(a).exp())
}

/// Ratio (M f_|G|)(s) / (M f_|W|)(s), evaluated in log space.
pub fn target_ratio(s: f64, theta: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be > 0, got {s}")));
    }
    let a = (s - 1.0) / theta + 1.0;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma argument {a} <= 0 (pole region)"
        )));
    }
    Ok((0.5 * (s - 1.0) * 2f64.ln() + ln_gamma(0.5 * s) - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(a))
        .exp())
}

/// |c_k| beyond this signals catastrophic cancellation: the true sequence
/// starts at c_1 = 1/2 and decays toward 0.
pub const BLOW_UP_BOUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    Float64,
    /// Double-double (two-float) accumulation of the alternating sum.
    Extended,
}

/// Coefficients of the Laguerre inversion series for the target ratio.
#[derive(Debug, Clone)]
pub struct LaguerreSeries {
    pub coefficients: Vec<f64>,
    pub precision_mode: PrecisionMode,
    /// First k (1-based) with |c_k| > BLOW_UP_BOUND, if any.
    pub divergence_index: Option<usize>,
}

// two-float (double-double) accumulator
#[derive(Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn add(self, x: f64) -> Dd {
        // Knuth two-sum
        let s = self.hi + x;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (x - bb);
        let lo = self.lo + err;
        let hi = s + lo;
        Dd { lo: lo - (hi - s), hi }
    }
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// c_k = sum_{n=1}^{k} C(k-1, n-1) (-1)^(n-1) f(n) / (2^n Gamma(n)),
/// f = target ratio. Terms are assembled in log space with sign tracking.
pub fn laguerre_coefficients(theta: f64, k_max: usize, mode: PrecisionMode) -> Result<LaguerreSeries> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    // log of f(n)/(2^n Gamma(n)) for n = 1..k_max
    let ln2 = 2f64.ln();
    let base: Vec<f64> = (1..=k_max)
        .map(|n| {
            let nf = n as f64;
            0.5 * (nf - 1.0) * ln2 + ln_gamma(0.5 * nf)
                - 0.5 * std::f64::consts::PI.ln()
                - ln_gamma((nf - 1.0) / theta + 1.0)
                - nf * ln2
                - ln_gamma(nf)
        })
        .collect();
    let mut coefficients = Vec::with_capacity(k_max);
    let mut divergence_index = None;
    for k in 1..=k_max {
        let kf = k as f64;
        let ln_gk = ln_gamma(kf);
        let mut acc_f64 = 0.0;
        let mut acc_dd = Dd::default();
        for n in 1..=k {
            let nf = n as f64;
            let lt = ln_gk - ln_gamma(nf) - ln_gamma(kf - nf + 1.0) + base[n - 1];
            let term = if n % 2 == 1 { lt.exp() } else { -lt.exp() };
            match mode {
                PrecisionMode::Float64 => acc_f64 += term,
                PrecisionMode::Extended => acc_dd = acc_dd.add(term),
            }
        }
        let ck = match mode {
            PrecisionMode::Float64 => acc_f64,
            PrecisionMode::Extended => acc_dd.value(),
        };
        if !ck.is_finite() || (ck.abs() > BLOW_UP_BOUND && divergence_index.is_none()) {
            divergence_index = Some(k);
        }
        coefficients.push(ck);
    }
    Ok(LaguerreSeries { coefficients, precision_mode: mode, divergence_index })
}

/// Partial-sum evaluation of the inverse transform at z >= 0:
/// e^(-z/2) sum_k c_{k+1} L_k(z/2), truncated at the divergence index when
/// one was detected.
pub fn laguerre_inverse_eval(series: &LaguerreSeries, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("z must be >= 0, got {z}")));
    }
    let k_used = series
        .divergence_index
        .map_or(series.coefficients.len(), |d| d.min(series.coefficients.len()));
    let x = 0.5 * z;
    let mut sum = 0.0;
    let (mut l_prev, mut l_curr) = (1.0, 1.0 - x); // L_0, L_1
    for (k, &c) in series.coefficients[..k_used].iter().enumerate() {
        let lk = if k == 0 { 1.0 } else { l_curr };
        sum += c * lk;
        if k >= 1 {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 - x) * l_curr - kf * l_prev) / (kf + 1.0);
            l_prev = l_curr;
            l_curr = next;
        }
    }
    Ok((-0.5 * z).exp() * sum)
}
