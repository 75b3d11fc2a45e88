//! Numerical checks of the analytic estimates behind stationarity, plus
//! ring diagnostics for radial masks.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::CompositeGauss;
use crate::special_fn::{bessel_j, bessel_j_prime, bessel_zero};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `int rho sin^2(j x) >= (m - sin m) / 2` with `m = int rho`, for `rho`
/// piecewise constant on a uniform partition of `(0, pi)` (one value per
/// piece). Both sides are integrated exactly.
pub fn check_sine_lower_bound(rho: &[f64], j: usize) -> Result<InequalityCheck> {
    if rho.is_empty() || j == 0 {
        return Err(Error::Precondition("need at least one piece and j >= 1".into()));
    }
    if let Some(v) = rho.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!("negative density sample {v}")));
    }
    let h = PI / rho.len() as f64;
    let mass: f64 = rho.iter().sum::<f64>() * h;
    if mass > PI * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("total mass {mass} exceeds pi")));
    }
    let jf = j as f64;
    let antiderivative = |x: f64| x / 2.0 - (2.0 * jf * x).sin() / (4.0 * jf);
    let lhs = rho
        .iter()
        .enumerate()
        .map(|(p, &v)| v * (antiderivative((p + 1) as f64 * h) - antiderivative(p as f64 * h)))
        .sum();
    let rhs = 0.5 * (mass - mass.sin());
    Ok(InequalityCheck { lhs, rhs, pass: lhs >= rhs - 1e-8 })
}

/// `F(s) = (s - sin s) / pi`.
pub fn f_map(s: f64) -> f64 {
    if s.abs() < 0.5 {
        // s - sin s without cancellation
        let s2 = s * s;
        let mut term = s * s2 / 6.0;
        let mut sum = 0.0;
        for k in 1..12 {
            sum += term;
            let n = (2 * k + 2) as f64;
            term *= -s2 / (n * (n + 1.0));
        }
        return sum / PI;
    }
    (s - s.sin()) / PI
}

/// `n`-fold composition of [`f_map`]. Arguments above `pi` are accepted:
/// the orthotope bound evaluates it at `L pi^n`.
pub fn iterated_f(s: f64, n: usize) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Precondition(format!("F needs a finite s >= 0, got {s}")));
    }
    Ok((0..n).fold(s, |v, _| f_map(v)))
}

/// `g(y) = sqrt(1 - y^2) - log((1 + sqrt(1 - y^2)) / y)`.
pub fn kapteyn_g(y: f64) -> f64 {
    let c = (1.0 - y * y).max(0.0).sqrt();
    c - ((1.0 + c) / y).ln()
}

/// `|J_j(j y)| <= exp(j g(y))`.
pub fn kapteyn_bound(j: usize, y: f64) -> Result<InequalityCheck> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Precondition(format!("y must lie in (0, 1], got {y}")));
    }
    if j == 0 {
        return Err(Error::Precondition("j must be >= 1".into()));
    }
    let lhs = bessel_j(j, j as f64 * y)?.abs();
    let rhs = (j as f64 * kapteyn_g(y)).exp();
    Ok(InequalityCheck { lhs, rhs, pass: lhs <= rhs + 1e-12 })
}

/// `R_jk(r)^2` with the closed-form normalization `2 / J_j'(z_jk)^2`.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    pub j: usize,
    pub zero: f64,
    scale: f64,
}

impl RadialProfile {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        let zero = bessel_zero(j, k)?;
        let d = bessel_j_prime(j, zero)?;
        Ok(Self { j, zero, scale: 2.0 / (d * d) })
    }

    pub fn sq(&self, r: f64) -> Result<f64> {
        let v = bessel_j(self.j, self.zero * r)?;
        Ok(self.scale * v * v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub k: usize,
    pub h: f64,
    pub orders: Vec<usize>,
    /// `max over [0, 1-h] of R_jk^2` per order.
    pub maxima: Vec<f64>,
    /// Least-squares slope of `log M_j` against `j`.
    pub slope: f64,
    pub strictly_decreasing: bool,
    pub pass: bool,
}

/// Concentration of `R_jk^2` near the boundary as `j` grows.
pub fn whispering_gallery_decay(k: usize, h: f64, orders: &[usize]) -> Result<DecayReport> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Precondition(format!("h must lie in (0, 1), got {h}")));
    }
    if orders.len() < 2 || orders.windows(2).any(|w| w[0] >= w[1]) || orders[0] == 0 {
        return Err(Error::Precondition(
            "orders must be increasing, start at j >= 1 and have two entries".into(),
        ));
    }
    const SAMPLES: usize = 4000;
    let maxima = orders
        .iter()
        .map(|&j| {
            let profile = RadialProfile::new(j, k)?;
            (0..=SAMPLES)
                .map(|i| profile.sq((1.0 - h) * i as f64 / SAMPLES as f64))
                .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = orders.iter().map(|&j| j as f64).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let strictly_decreasing = maxima.windows(2).all(|w| w[1] < w[0]);
    Ok(DecayReport {
        k,
        h,
        orders: orders.to_vec(),
        maxima,
        slope,
        strictly_decreasing,
        pass: slope < 0.0,
    })
}

/// `f_s(r) = r / (sqrt(1 - s^2) sqrt(r^2 - s^2))` on `(s, 1)`, zero below.
pub fn quantum_limit_density(s: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Precondition(format!("s must lie in [0, 1), got {s}")));
    }
    if r <= s {
        return Ok(0.0);
    }
    Ok(r / ((1.0 - s * s).sqrt() * (r * r - s * s).sqrt()))
}

/// `int_a^b f_s(r) dr` for `s <= a < b <= 1`, integrated in `u = sqrt(r^2 - s^2)`
/// so the endpoint singularity disappears.
pub fn quantum_limit_mass(s: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) || !(s <= a && a < b && b <= 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 <= s <= a < b <= 1 with s < 1, got s={s}, a={a}, b={b}"
        )));
    }
    let (ua, ub) = ((a * a - s * s).sqrt(), (b * b - s * s).sqrt());
    let q = CompositeGauss::new(ua, ub, 16, 10);
    let mut err = None;
    let total = q.integrate(|u| {
        let r = (u * u + s * s).sqrt();
        match quantum_limit_density(s, r) {
            Ok(f) => f * u / r,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Largest gap between the cumulative distributions of `R_jk(r)^2 r dr` and
/// of `f_s(r) dr` with `s = j / z_jk`, sampled on `[s + margin, 1 - margin]`.
///
/// The densities themselves oscillate and only converge weakly, so their
/// distribution functions are compared.
pub fn quantum_limit_distance(j: usize, k: usize, margin: f64) -> Result<f64> {
    let profile = RadialProfile::new(j, k)?;
    let s = j as f64 / profile.zero;
    let (lo, hi) = (s + margin, 1.0 - margin);
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty window for s = {s}")));
    }
    const PANELS: usize = 400;
    let mut sup = 0.0f64;
    let mut cdf = CompositeGauss::new(0.0, lo, 400, 10)
        .integrate(|r| profile.sq(r).unwrap_or(f64::NAN) * r);
    let dr = (hi - lo) / PANELS as f64;
    for p in 0..PANELS {
        let (a, b) = (lo + p as f64 * dr, lo + (p + 1) as f64 * dr);
        cdf += CompositeGauss::new(a, b, 1, 10)
            .integrate(|r| profile.sq(r).unwrap_or(f64::NAN) * r);
        let limit = quantum_limit_mass(s, s, b)?;
        sup = sup.max((cdf - limit).abs());
    }
    if !sup.is_finite() {
        return Err(Error::Precision(format!("Bessel evaluation failed for ({j}, {k})")));
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingProfile {
    /// `(r_in, r_out)` of each maximal run of selected radial cells.
    pub rings: Vec<(f64, f64)>,
    pub ring_count: usize,
    /// `1 - r_out` of the outermost ring (1 when there is none).
    pub outermost_gap: f64,
}

/// Rings of a binary mask on uniform radial cells of `(0, 1)`.
pub fn count_rings(mask: &[f64]) -> RingProfile {
    let n = mask.len().max(1) as f64;
    let mut rings = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &v) in mask.iter().enumerate() {
        match (v >= 0.5, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                rings.push((s as f64 / n, i as f64 / n));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        rings.push((s as f64 / n, 1.0));
    }
    let outermost_gap = rings.last().map_or(1.0, |r| 1.0 - r.1);
    RingProfile { ring_count: rings.len(), rings, outermost_gap }
}
