//! Edge-of-Chaos engine: variance map, correlation maps, fixed points and
//! stability, phase classification, EOC curve solving, and the oscillatory
//! counterexample activation with its weight-std calibration.

use crate::quadrature::{default_rule_1d, default_rule_2d, gauss_expect_1d, gauss_expect_2d};
use crate::{Error, Result};

/// A pointwise activation function.
pub trait Activation: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct Tanh;
impl Activation for Tanh {
    fn eval(&self, x: f64) -> f64 {
        x.tanh()
    }
    fn name(&self) -> String {
        "tanh".into()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Relu;
impl Activation for Relu {
    fn eval(&self, x: f64) -> f64 {
        x.max(0.0)
    }
    fn name(&self) -> String {
        "relu".into()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity;
impl Activation for Identity {
    fn eval(&self, x: f64) -> f64 {
        x
    }
    fn name(&self) -> String {
        "identity".into()
    }
}

/// Oscillatory strictly increasing activation
/// x * exp((delta/omega) sin(omega ln |x|)), 0 at x = 0 by continuity.
#[derive(Debug, Clone, Copy)]
pub struct PhiDeltaOmega {
    pub delta: f64,
    pub omega: f64,
}

impl PhiDeltaOmega {
    pub fn new(delta: f64, omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta {delta} not in [0,1]")));
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega {omega} must be > 0")));
        }
        Ok(Self { delta, omega })
    }
}

impl Activation for PhiDeltaOmega {
    fn eval(&self, x: f64) -> f64 {
        if x.abs() < 1e-300 {
            return 0.0;
        }
        x * ((self.delta / self.omega) * (self.omega * x.abs().ln()).sin()).exp()
    }
    fn name(&self) -> String {
        format!("phi_{{{},{}}}", self.delta, self.omega)
    }
}

/// Convenience free function matching the definition above.
pub fn phi_delta_omega(delta: f64, omega: f64, x: f64) -> f64 {
    PhiDeltaOmega { delta, omega }.eval(x)
}

/// (sigma_w, sigma_b, activation) bundle feeding the maps.
pub struct EocSetting<'a> {
    pub sigma_w: f64,
    pub sigma_b: f64,
    pub activation: &'a dyn Activation,
}

impl<'a> EocSetting<'a> {
    pub fn new(sigma_w: f64, sigma_b: f64, activation: &'a dyn Activation) -> Result<Self> {
        if !(sigma_w > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma_w {sigma_w} must be > 0")));
        }
        if !(sigma_b >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma_b {sigma_b} must be >= 0")));
        }
        Ok(Self { sigma_w, sigma_b, activation })
    }
}

/// One-layer variance recurrence:
/// V(v) = sigma_w^2 E[phi(sqrt(v) Z)^2] + sigma_b^2.
pub fn variance_map(v: f64, setting: &EocSetting) -> Result<f64> {
    let e = gauss_expect_1d(
        |z| {
            let y = setting.activation.eval(z);
            y * y
        },
        v,
        default_rule_1d(),
    )?;
    Ok(setting.sigma_w * setting.sigma_w * e + setting.sigma_b * setting.sigma_b)
}

/// One-layer correlation recurrence, normalized by the output stds.
pub fn correlation_map(c: f64, va: f64, vb: f64, setting: &EocSetting) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("correlation {c} not in [-1,1]")));
    }
    if !(va > 0.0) || !(vb > 0.0) {
        return Err(Error::InvalidParameter("variances must be > 0".into()));
    }
    let cross = gauss_expect_2d(
        |x, y| setting.activation.eval(x) * setting.activation.eval(y),
        va,
        vb,
        c,
        default_rule_2d(),
    )?;
    let num = setting.sigma_w * setting.sigma_w * cross + setting.sigma_b * setting.sigma_b;
    let den = (variance_map(va, setting)? * variance_map(vb, setting)?).sqrt();
    if den == 0.0 {
        return Err(Error::Degenerate("zero output variance".into()));
    }
    Ok(num / den)
}

/// Finds the fixed point of the variance map by iteration from v = 1.
/// Convergence: |v_{l+1} - v_l| < 1e-10 max(1, v_l), capped at 1e4 steps.
pub fn find_v_star(setting: &EocSetting) -> Result<f64> {
    let mut v = 1.0;
    for _ in 0..10_000 {
        let next = variance_map(v, setting)?;
        if !next.is_finite() || next > 1e12 {
            return Err(Error::Numeric("variance iteration diverged".into()));
        }
        if (next - v).abs() < 1e-10 * v.max(1.0) {
            if next < 1e-8 {
                return Err(Error::Numeric("no nonzero fixed point (variance collapsed)".into()));
            }
            return Ok(next);
        }
        v = next;
    }
    Err(Error::Numeric("variance iteration did not converge".into()))
}

/// Correlation map evaluated at the variance fixed point.
pub fn correlation_map_star(c: f64, setting: &EocSetting) -> Result<f64> {
    let v_star = find_v_star(setting)?;
    correlation_map_at(c, v_star, setting)
}

/// Correlation map at an explicitly chosen fixed point (override for maps
/// with several fixed points).
pub fn correlation_map_at(c: f64, v_star: f64, setting: &EocSetting) -> Result<f64> {
    correlation_map(c, v_star, v_star, setting)
}

/// Slope of the correlation map at c = 1, by one-sided finite differences
/// with step h = 1e-4 and one Richardson extrapolation.
pub fn chi1(setting: &EocSetting) -> Result<f64> {
    let v_star = find_v_star(setting)?;
    chi1_at(v_star, setting)
}

pub fn chi1_at(v_star: f64, setting: &EocSetting) -> Result<f64> {
    let h = 1e-4;
    let c1 = correlation_map_at(1.0, v_star, setting)?;
    let d = |hh: f64| -> Result<f64> {
        Ok((c1 - correlation_map_at(1.0 - hh, v_star, setting)?) / hh)
    };
    Ok(2.0 * d(h / 2.0)? - d(h)?)
}

/// Propagation phase of a setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Ordered,
    Chaotic,
    Edge,
}

pub fn phase_classify(setting: &EocSetting) -> Result<Phase> {
    let x = chi1(setting)?;
    Ok(if (x - 1.0).abs() <= 1e-3 {
        Phase::Edge
    } else if x < 1.0 {
        Phase::Ordered
    } else {
        Phase::Chaotic
    })
}

/// One solved point of the EOC curve.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EocPoint {
    pub sigma_b: f64,
    pub sigma_w: f64,
    pub v_star: f64,
    pub chi1: f64,
}

/// Result of an EOC curve solve; grid points where no sigma_w bracket was
/// found are reported as warnings.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EocCurve {
    pub points: Vec<EocPoint>,
    pub warnings: Vec<String>,
}

/// Solves chi1(sigma_w) = 1 by bisection over sigma_w in [0.05, 10] for each
/// sigma_b in the grid.
pub fn eoc_curve(activation: &dyn Activation, sigma_b_grid: &[f64]) -> Result<EocCurve> {
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for &sigma_b in sigma_b_grid {
        let chi = |sigma_w: f64| -> Result<f64> {
            let setting = EocSetting::new(sigma_w, sigma_b, activation)?;
            chi1(&setting)
        };
        // scan for a sign change of chi1 - 1
        let grid_n = 40;
        let (lo, hi) = (0.05f64, 10.0f64);
        let mut bracket = None;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=grid_n {
            let s = lo * (hi / lo).powf(i as f64 / grid_n as f64);
            match chi(s) {
                Ok(x) => {
                    if let Some((ps, px)) = prev {
                        if (px - 1.0) * (x - 1.0) <= 0.0 {
                            bracket = Some((ps, s));
                            break;
                        }
                    }
                    prev = Some((s, x));
                }
                Err(_) => {
                    prev = None;
                }
            }
        }
        let Some((mut a, mut b)) = bracket else {
            warnings.push(format!("sigma_b={sigma_b}: no sign change of chi1 - 1 in [0.05, 10]"));
            continue;
        };
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let xm = chi(m)?;
            if (xm - 1.0).abs() <= 1e-4 {
                a = m;
                b = m;
                break;
            }
            let xa = chi(a)?;
            if (xa - 1.0) * (xm - 1.0) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
            if (b - a).abs() < 1e-10 {
                break;
            }
        }
        let sigma_w = 0.5 * (a + b);
        let setting = EocSetting::new(sigma_w, sigma_b, activation)?;
        let v_star = find_v_star(&setting)?;
        let x = chi1_at(v_star, &setting)?;
        if (x - 1.0).abs() <= 1e-3 {
            points.push(EocPoint { sigma_b, sigma_w, v_star, chi1: x });
        } else {
            warnings.push(format!("sigma_b={sigma_b}: bisection ended with |chi1-1| = {:e}", (x - 1.0).abs()));
        }
    }
    Ok(EocCurve { points, warnings })
}

/// Calibrated weight std for the oscillatory activation: the harmonic mean of
/// the two envelope integrals of the variance map, computed by trapezoid in
/// log coordinates.
pub fn sigma_omega(delta: f64, omega: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} not in (0,1]")));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega {omega} must be > 0")));
    }
    // 2 * int_0^inf z^2 exp(s * 2 delta/omega * sin(omega ln z)) Dz,
    // substituted r = ln z
    let envelope = |sign: f64| {
        let (r0, r1, dr) = (-40.0, 4.0, 1e-3);
        let n = ((r1 - r0) / dr) as usize;
        let f = |r: f64| {
            (3.0 * r - 0.5 * (2.0 * r).exp() + sign * 2.0 * delta / omega * (omega * r).sin()).exp()
        };
        let mut acc = 0.5 * (f(r0) + f(r1));
        for i in 1..n {
            acc += f(r0 + i as f64 * dr);
        }
        2.0 / (2.0 * std::f64::consts::PI).sqrt() * acc * dr
    };
    let v_low = envelope(-1.0);
    let v_upp = envelope(1.0);
    Ok(((v_low + v_upp) / 2.0).powf(-0.5))
}

/// A located fixed point of the variance map.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FixedPoint {
    pub v: f64,
    pub slope: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
    /// Set when the map is (numerically) the identity on the whole scan grid.
    pub degenerate_continuum: bool,
}

/// Scans sign changes of V(v) - v on a log-spaced grid, refines each root by
/// bisection to |V(v*) - v*| < 1e-8 v*, classifies stability from the
/// finite-difference slope.
pub fn find_fixed_points(
    setting: &EocSetting,
    v_min: f64,
    v_max: f64,
    resolution: usize,
) -> Result<FixedPointReport> {
    if !(v_min > 0.0 && v_max > v_min) {
        return Err(Error::InvalidParameter("need 0 < v_min < v_max".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be >= 2".into()));
    }
    let gap = |v: f64| -> Result<f64> { Ok(variance_map(v, setting)? - v) };
    let grid: Vec<f64> = (0..resolution)
        .map(|i| v_min * (v_max / v_min).powf(i as f64 / (resolution - 1) as f64))
        .collect();
    let gaps: Vec<f64> = grid.iter().map(|&v| gap(v)).collect::<Result<_>>()?;
    if gaps.iter().zip(&grid).all(|(g, v)| g.abs() < 1e-9 * v.max(1.0)) {
        return Ok(FixedPointReport { points: Vec::new(), degenerate_continuum: true });
    }
    let mut points = Vec::new();
    for i in 0..resolution - 1 {
        if gaps[i] == 0.0 || gaps[i] * gaps[i + 1] < 0.0 {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let mut fa = gaps[i];
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = gap(m)?;
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
                if fm.abs() < 1e-8 * m || (b - a) < 1e-14 * m {
                    break;
                }
            }
            let v = 0.5 * (a + b);
            let h = 1e-6 * v;
            let slope = (variance_map(v + h, setting)? - variance_map(v - h, setting)?) / (2.0 * h);
            points.push(FixedPoint { v, slope, stable: slope.abs() < 1.0 });
        }
    }
    Ok(FixedPointReport { points, degenerate_continuum: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_eoc_identity() {
        // sigma_w^2 = 2, sigma_b = 0: V(v) = v for ReLU
        let setting = EocSetting::new(2.0f64.sqrt(), 0.0, &Relu).unwrap();
        let v = variance_map(3.0, &setting).unwrap();
        assert!((v - 3.0).abs() < 1e-9);
    }

    #[test]
    fn identity_map_is_linear() {
        let setting = EocSetting::new(1.0, 0.0, &Identity).unwrap();
        for v0 in [0.3, 1.0, 5.0] {
            assert!((variance_map(v0, &setting).unwrap() - v0).abs() < 1e-10);
        }
    }

    #[test]
    fn tanh_critical_pair_has_fixed_point() {
        let setting = EocSetting::new(1.46f64.sqrt(), 0.013f64.sqrt(), &Tanh).unwrap();
        let v = find_v_star(&setting).unwrap();
        assert!(v > 0.0 && v.is_finite());
        assert!((variance_map(v, &setting).unwrap() - v).abs() < 1e-8);
    }

    #[test]
    fn correlation_fixes_one_and_identity_preserves() {
        let setting = EocSetting::new(1.46f64.sqrt(), 0.013f64.sqrt(), &Tanh).unwrap();
        let v = find_v_star(&setting).unwrap();
        let c1 = correlation_map(1.0, v, v, &setting).unwrap();
        assert!((c1 - 1.0).abs() < 1e-9);

        let id = EocSetting::new(1.0, 0.0, &Identity).unwrap();
        for rho in [-0.5, 0.0, 0.8] {
            let c = correlation_map(rho, 2.0, 0.7, &id).unwrap();
            assert!((c - rho).abs() < 1e-9, "rho {rho} -> {c}");
        }
    }

    #[test]
    fn odd_activation_kills_zero_correlation() {
        let setting = EocSetting::new(1.2, 0.0, &Tanh).unwrap();
        let c = correlation_map(0.0, 1.0, 1.0, &setting).unwrap();
        assert!(c.abs() < 1e-10);
    }

    #[test]
    fn chi1_reference_values() {
        let id = EocSetting::new(1.0, 0.0, &Identity).unwrap();
        assert!((chi1(&id).unwrap() - 1.0).abs() < 1e-6);

        let relu = EocSetting::new(2.0f64.sqrt(), 0.0, &Relu).unwrap();
        assert!((chi1(&relu).unwrap() - 1.0).abs() < 1e-3);

        let tanh = EocSetting::new(1.46f64.sqrt(), 0.013f64.sqrt(), &Tanh).unwrap();
        assert!((chi1(&tanh).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn phases() {
        let ordered = EocSetting::new(0.5f64.sqrt(), 0.013f64.sqrt(), &Tanh).unwrap();
        assert_eq!(phase_classify(&ordered).unwrap(), Phase::Ordered);
        let chaotic = EocSetting::new(2.0, 0.013f64.sqrt(), &Tanh).unwrap();
        assert_eq!(phase_classify(&chaotic).unwrap(), Phase::Chaotic);
        let edge = EocSetting::new(2.0f64.sqrt(), 0.0, &Relu).unwrap();
        assert_eq!(phase_classify(&edge).unwrap(), Phase::Edge);
    }

    #[test]
    fn phi_delta_omega_basics() {
        assert_eq!(phi_delta_omega(0.5, 2.0, 0.0), 0.0);
        assert!((phi_delta_omega(0.5, 2.0, 1.0) - 1.0).abs() < 1e-15);
        for x in [0.3, 1.7, 4.2] {
            let f = PhiDeltaOmega::new(0.99, 6.0).unwrap();
            assert!((f.eval(-x) + f.eval(x)).abs() < 1e-12);
        }
        // delta = 0 collapses to the identity
        for x in [-2.0, 0.4, 3.0] {
            assert!((phi_delta_omega(0.0, 3.0, x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_fixed_point_continuum() {
        let setting = EocSetting::new(1.0, 0.0, &Identity).unwrap();
        let report = find_fixed_points(&setting, 0.01, 10.0, 100).unwrap();
        assert!(report.degenerate_continuum);
    }

    #[test]
    fn tanh_single_attractor() {
        let setting = EocSetting::new(1.46f64.sqrt(), 0.013f64.sqrt(), &Tanh).unwrap();
        let report = find_fixed_points(&setting, 1e-3, 10.0, 400).unwrap();
        assert!(!report.degenerate_continuum);
        assert_eq!(report.points.len(), 1);
        assert!(report.points[0].stable);
    }

    #[test]
    fn log_log_periodicity_of_oscillatory_map() {
        let act = PhiDeltaOmega::new(0.99, 6.0).unwrap();
        let sw = sigma_omega(0.99, 6.0).unwrap();
        let setting = EocSetting::new(sw, 0.0, &act).unwrap();
        let period = 4.0 * std::f64::consts::PI / 6.0;
        for r in [-1.0f64, 0.0, 0.5, 1.3] {
            let v1 = variance_map(r.exp(), &setting).unwrap() / r.exp();
            let v2 = variance_map((r + period).exp(), &setting).unwrap() / (r + period).exp();
            assert!((v1.ln() - v2.ln()).abs() < 1e-6, "r={r}: {v1} vs {v2}");
        }
    }
}
