//! Monotone cubic (Fritsch-Carlson) interpolation on a strictly increasing
//! table, with derivative evaluation. Used for activation tables and inverse
//! CDF lookups.

use crate::{Error, Result};

/// Piecewise cubic Hermite interpolant whose slopes are limited so a
/// monotone table yields a monotone interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        if xs.len() < 2 {
            return Err(Error::Degenerate("need at least 2 points".into()));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("x grid not strictly increasing".into()));
            }
        }
        let n = xs.len();
        let d: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 {
                0.0
            } else {
                // harmonic mean keeps the interpolant monotone
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])
            };
        }
        Ok(Self { xs, ys, slopes: m })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Interpolated value; linear extrapolation with the boundary slope
    /// outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative of the interpolant.
    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.slopes[0];
        }
        if x >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        dh00 * self.ys[i] + dh10 * self.slopes[i] + dh01 * self.ys[i + 1] + dh11 * self.slopes[i + 1]
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Inverse lookup on a tabulated nondecreasing CDF by linear interpolation.
/// `cdf` and `grid` have equal length; returns the abscissa where the CDF
/// reaches `p`.
pub fn inverse_lookup(grid: &[f64], cdf: &[f64], p: f64) -> f64 {
    debug_assert_eq!(grid.len(), cdf.len());
    let n = cdf.len();
    if p <= cdf[0] {
        return grid[0];
    }
    if p >= cdf[n - 1] {
        return grid[n - 1];
    }
    let i = match cdf.binary_search_by(|v| v.partial_cmp(&p).unwrap()) {
        Ok(i) => return grid[i],
        Err(i) => i,
    };
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    if c1 <= c0 {
        return grid[i];
    }
    grid[i - 1] + (p - c0) / (c1 - c0) * (grid[i] - grid[i - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_exactly() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.tanh()).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(c.eval(*x), *y);
        }
    }

    #[test]
    fn monotone_input_gives_monotone_output() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x + (2.0 * x).sin() * 0.3).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let v = c.eval(i as f64 * 0.0049);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs: Vec<f64> = (0..200).map(|i| -3.0 + i as f64 * 0.03).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.tanh()).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for &x in &[-1.0, 0.0, 0.7, 2.0] {
            let fd = (c.eval(x + 1e-6) - c.eval(x - 1e-6)) / 2e-6;
            assert!((c.deriv(x) - fd).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn inverse_lookup_roundtrip() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let cdf: Vec<f64> = grid.iter().map(|&x| 1.0 - (-x).exp()).collect();
        for p in [0.1, 0.5, 0.9] {
            let x = inverse_lookup(&grid, &cdf, p);
            assert!(((1.0 - (-x).exp()) - p).abs() < 2e-3);
        }
    }
}
