//! Gauss-Hermite quadrature for the Gaussian measure
//! Dz = exp(-z^2/2)/sqrt(2 pi) dz, plus tabulated-CDF helpers and the
//! product-convolution CDF integral.

use crate::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Hermite rule for the probabilists' weight, normalized so the
/// weights sum to 1 (the rule integrates against the N(0,1) measure).
#[derive(Debug, Clone)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Orthonormal probabilists' Hermite values p_0..p_n at x.
fn hermite_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let next = (x * p[k] - (k as f64).sqrt() * p[k - 1]) / ((k + 1) as f64).sqrt();
        p.push(next);
    }
    p
}

impl HermiteRule {
    /// Builds the rule by scanning for sign changes of the degree-`order`
    /// orthonormal Hermite polynomial and refining each root by bisection.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("Hermite order must be >= 1".into()));
        }
        let n = order;
        let pn = |x: f64| hermite_values(n, x)[n];
        let bound = 2.0 * (n as f64).sqrt() + 2.0;
        let step = std::f64::consts::PI / (8.0 * (n as f64).sqrt());
        let mut nodes = Vec::with_capacity(n);
        let mut x = -bound;
        let mut fx = pn(x);
        while x < bound && nodes.len() < n {
            let x2 = x + step;
            let f2 = pn(x2);
            if fx == 0.0 {
                nodes.push(x);
            } else if fx * f2 < 0.0 {
                let (mut a, mut b, mut fa) = (x, x2, fx);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    let fm = pn(m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                nodes.push(0.5 * (a + b));
            }
            x = x2;
            fx = f2;
        }
        if nodes.len() != n {
            return Err(Error::Numeric(format!(
                "found {} of {} Hermite nodes",
                nodes.len(),
                n
            )));
        }
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&xi| {
                let p = hermite_values(n - 1, xi);
                1.0 / p.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Cached default rules: order 128 for 1D, 64 for each axis of the 2D tensor
/// grid.
pub fn default_rule_1d() -> &'static HermiteRule {
    static RULE: OnceLock<HermiteRule> = OnceLock::new();
    RULE.get_or_init(|| HermiteRule::new(128).expect("order-128 rule"))
}

pub fn default_rule_2d() -> &'static HermiteRule {
    static RULE: OnceLock<HermiteRule> = OnceLock::new();
    RULE.get_or_init(|| HermiteRule::new(64).expect("order-64 rule"))
}

/// E[f(sqrt(v) Z)] with Z ~ N(0,1).
pub fn gauss_expect_1d(f: impl Fn(f64) -> f64, v: f64, rule: &HermiteRule) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::InvalidParameter(format!("variance {v} < 0")));
    }
    let s = v.sqrt();
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let y = f(s * x);
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("integrand at node {}", s * x)));
        }
        acc += w * y;
    }
    Ok(acc)
}

/// E[f(sqrt(va) Z1, sqrt(vb) Z2')] where Z2' = c Z1 + sqrt(1-c^2) Z2 over a
/// tensor-product rule.
pub fn gauss_expect_2d(
    f: impl Fn(f64, f64) -> f64,
    va: f64,
    vb: f64,
    c: f64,
    rule: &HermiteRule,
) -> Result<f64> {
    if !(va >= 0.0) || !(vb >= 0.0) {
        return Err(Error::InvalidParameter("negative variance".into()));
    }
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("correlation {c} not in [-1,1]")));
    }
    let (sa, sb) = (va.sqrt(), vb.sqrt());
    let t = (1.0 - c * c).max(0.0).sqrt();
    let mut acc = 0.0;
    for (&z1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        let mut inner = 0.0;
        for (&z2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            inner += w2 * f(sa * z1, sb * (c * z1 + t * z2));
        }
        if !inner.is_finite() {
            return Err(Error::NonFinite("2d integrand".into()));
        }
        acc += w1 * inner;
    }
    Ok(acc)
}

/// Cumulative trapezoid integral of a tabulated nonnegative density,
/// clamped monotone.
pub fn cdf_from_density(grid: &[f64], density: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 2 {
        return Err(Error::Degenerate("grid needs at least 2 points".into()));
    }
    if grid.len() != density.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: density.len(),
        });
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter("grid not strictly increasing".into()));
        }
    }
    if let Some(&d) = density.iter().find(|&&d| d < -1e-9) {
        return Err(Error::InvalidParameter(format!("negative density entry {d}")));
    }
    let mut cdf = Vec::with_capacity(grid.len());
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 1..grid.len() {
        let step = 0.5 * (density[i] + density[i - 1]).max(0.0) * (grid[i] - grid[i - 1]);
        acc += step.max(0.0);
        cdf.push(acc);
    }
    Ok(cdf)
}

/// Grid settings for the product-convolution integral.
#[derive(Debug, Clone, Copy)]
pub struct ProductCdfConfig {
    /// Upper truncation of the half-line integral.
    pub t_max: f64,
    /// Number of midpoint cells.
    pub steps: usize,
}

impl Default for ProductCdfConfig {
    fn default() -> Self {
        Self { t_max: 12.0, steps: 6000 }
    }
}

/// CDF of the product |W| * |Y| at z:
/// integral over t of F_|W|(z/t) g(t) dt, with F_|W|(u) = 1 - exp(-u^theta)
/// and g a candidate density for |Y|. Midpoint rule on (0, t_max]; the
/// integrand is bounded (F_|W| <= 1) so the t -> 0 cell needs no special
/// handling beyond midpoint placement.
pub fn product_cdf(
    theta: f64,
    g: impl Fn(f64) -> f64,
    z: f64,
    config: ProductCdfConfig,
) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("z must be >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let dt = config.t_max / config.steps as f64;
    let mut acc = 0.0;
    for j in 0..config.steps {
        let t = (j as f64 + 0.5) * dt;
        let fw = 1.0 - (-(z / t).powf(theta)).exp();
        acc += fw * g(t);
    }
    Ok(acc * dt)
}
