//! Probability laws used throughout: symmetric Weibull, standard normal,
//! half-normal, Rademacher, plus sample standardization.
//!
//! All samplers take explicit `(master seed, stream id)` arguments and are
//! deterministic; see [`crate::rng`].

use crate::special::{erf, erfc, ln_gamma};
use crate::{Error, Result};
use rand::Rng;

/// Symmetric Weibull law W(theta, 1): the two-sided law of S * |W| where S is
/// a fair sign and |W| is Weibull with shape `theta` and unit scale.
///
/// CDF: F(t) = 1/2 + sgn(t) (1 - exp(-|t|^theta)) / 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricWeibull {
    theta: f64,
}

impl SymmetricWeibull {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Weibull shape must be positive and finite, got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::NonFinite(format!("weibull_cdf argument {t}")));
        }
        let half_mass = 0.5 * (1.0 - (-t.abs().powf(self.theta)).exp());
        Ok(0.5 + t.signum() * half_mass)
    }

    /// Density f(t) = (theta/2) |t|^(theta-1) exp(-|t|^theta).
    pub fn density(&self, t: f64) -> f64 {
        let a = t.abs();
        if a == 0.0 {
            return if self.theta > 1.0 {
                0.0
            } else if self.theta == 1.0 {
                0.5
            } else {
                f64::INFINITY
            };
        }
        0.5 * self.theta * a.powf(self.theta - 1.0) * (-a.powf(self.theta)).exp()
    }

    /// Closed-form inverse of the CDF:
    /// t = sgn(p - 1/2) * (-ln(1 - 2|p - 1/2|))^(1/theta).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile requires p in (0,1), got {p}"
            )));
        }
        let d = p - 0.5;
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(d.signum() * (-(1.0 - 2.0 * d.abs()).ln()).powf(1.0 / self.theta))
    }

    /// Half-Weibull CDF of |W|: F(u) = 1 - exp(-u^theta) for u >= 0.
    pub fn half_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            1.0 - (-u.powf(self.theta)).exp()
        }
    }

    /// One draw by inverse-CDF of a uniform.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        // u in (0,1); the open interval keeps the quantile finite
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 && u < 1.0 {
                break u;
            }
        };
        self.quantile(u).expect("u in (0,1)")
    }

    /// i.i.d. draws by inverse-CDF of uniforms; deterministic under the seed.
    pub fn sample(&self, master_seed: u64, stream: u64, n: usize) -> Vec<f64> {
        let mut rng = crate::rng::stream_rng(master_seed, stream);
        (0..n).map(|_| self.sample_one(&mut rng)).collect()
    }
}

/// Unit Gaussian: CDF, density, sampler, and the half-normal marginal of |G|.
#[derive(Debug, Clone, Copy, Default)]
pub struct StdNormal;

impl StdNormal {
    /// Phi(z) via erfc, accurate to ~1e-15 everywhere.
    pub fn cdf(z: f64) -> f64 {
        0.5 * erfc(-z / std::f64::consts::SQRT_2)
    }

    pub fn density(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// CDF of |G|: 2 Phi(z) - 1 = erf(z / sqrt(2)) for z >= 0.
    pub fn half_cdf(z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else {
            erf(z / std::f64::consts::SQRT_2)
        }
    }

    /// Density of |G|; value at 0 is sqrt(2/pi).
    pub fn half_density(z: f64) -> f64 {
        if z < 0.0 {
            0.0
        } else {
            (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
        }
    }
}

/// Standard normal CDF (free-function form).
pub fn std_normal_cdf(z: f64) -> f64 {
    StdNormal::cdf(z)
}

/// n standard normal draws (Box-Muller), deterministic under the seed.
pub fn std_normal_sample(master_seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = crate::rng::stream_rng(master_seed, stream);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (a, b) = normal_pair(&mut rng);
        out.push(a);
        if out.len() < n {
            out.push(b);
        }
    }
    out
}

/// One Box-Muller pair from an RNG.
pub fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

/// n fair +/-1 draws.
pub fn rademacher_sample(master_seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = crate::rng::stream_rng(master_seed, stream);
    (0..n)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Empirical mean and corrected (n-1 denominator) standard deviation.
pub fn mean_std(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(
            "need at least 2 samples for a corrected std".into(),
        ));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Affine map to empirical mean 0 and corrected std 1.
pub fn standardize(samples: &[f64]) -> Result<Vec<f64>> {
    let (mean, std) = mean_std(samples)?;
    if std == 0.0 || !std.is_finite() {
        return Err(Error::Degenerate("zero or non-finite sample std".into()));
    }
    Ok(samples.iter().map(|x| (x - mean) / std).collect())
}

/// Gamma(1 - 1/theta), the value of the integral of f_|W|(t)/t for theta > 1.
pub fn weibull_inverse_moment(theta: f64) -> f64 {
    ln_gamma(1.0 - 1.0 / theta).exp()
}
