//! The analytic property suite behind `parobs checks`.

use std::f64::consts::PI;

use parobs_core::analysis::{
    check_sine_lower_bound, f_map, kapteyn_bound, kapteyn_g, quantum_limit_mass,
    whispering_gallery_decay,
};
use parobs_core::special_fn::{bessel_j, BesselZeroTable};
use parobs_core::stationarity::n0_bound_orthotope;
use parobs_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SEED: u64 = 20240611;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChecksReport {
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl ChecksReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn result(name: &str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name: name.into(), passed, detail },
        Err(e) => CheckResult { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

/// Piecewise-constant density on `raw.len()` pieces of `(0, pi)`, scaled and
/// clipped at 1 so that it carries `mass`.
pub fn clipped_density(raw: &[f64], mass: f64) -> Vec<f64> {
    let h = PI / raw.len() as f64;
    let total = |c: f64| raw.iter().map(|v| (c * v).min(1.0)).sum::<f64>() * h;
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) < mass {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    raw.iter().map(|v| (hi * v).min(1.0)).collect()
}

fn sine_lower_bound() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let fraction: f64 = rng.gen_range(0.05..0.95);
        let raw: Vec<f64> = (0..32).map(|_| rng.gen_range(0.0..1.0)).collect();
        let rho = clipped_density(&raw, fraction * PI);
        for j in 1..=50 {
            let c = check_sine_lower_bound(&rho, j)?;
            worst = worst.min(c.lhs - c.rhs);
            failures += usize::from(!c.pass);
        }
    }
    Ok((failures == 0, format!("100 densities x 50 orders, {failures} violations, min lhs - rhs = {worst:.3e}")))
}

fn kapteyn() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for j in [5, 10, 20, 40] {
        for y in [0.3, 0.6, 0.9] {
            if !kapteyn_bound(j, y)?.pass {
                bad.push(format!("(j={j}, y={y})"));
            }
        }
    }
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = kapteyn_g(1.0) == 0.0;
    for i in 1..=100 {
        let g = kapteyn_g(i as f64 / 100.0);
        monotone &= g > prev && g <= 0.0;
        prev = g;
    }
    Ok((bad.is_empty() && monotone, format!("12 points, failing: [{}], g increasing to 0: {monotone}", bad.join(", "))))
}

fn f_monotone() -> Result<(bool, String)> {
    let mut prev = f_map(0.0);
    let mut ok = prev == 0.0 && (f_map(PI) - 1.0).abs() < 1e-15;
    for i in 1..=200 {
        let v = f_map(PI * i as f64 / 200.0);
        ok &= v > prev;
        prev = v;
    }
    Ok((ok, "F(0) = 0, F(pi) = 1, strictly increasing on 200 points".into()))
}

fn quantum_normalization() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for s in [0.0, 0.25, 0.5, 0.75, 0.9] {
        worst = worst.max((quantum_limit_mass(s, s, 1.0)? - 1.0).abs());
    }
    Ok((worst < 1e-6, format!("max |mass - 1| = {worst:.2e} over 5 values of s")))
}

fn whispering() -> Result<(bool, String)> {
    let orders = [10, 20, 40, 80];
    let a = whispering_gallery_decay(1, 0.1, &orders)?;
    let b = whispering_gallery_decay(1, 0.3, &orders)?;
    Ok((
        a.slope < 0.0 && b.slope < 0.0,
        format!("fitted slopes {:.4} (h = 0.1) and {:.4} (h = 0.3)", a.slope, b.slope),
    ))
}

fn zeros() -> Result<(bool, String)> {
    let t = BesselZeroTable::build(41, 41)?;
    let at = |j: usize, k: usize| t.get(j, k).unwrap_or(f64::NAN);
    let mut failures = 0;
    for j in 0..=40 {
        for k in 1..=40 {
            let z = at(j, k);
            let bracket = z >= (j + k) as f64 && z <= PI * (j + k) as f64;
            let interlace = z < at(j + 1, k) && at(j + 1, k) < at(j, k + 1);
            let root = bessel_j(j, z)?.abs() <= 1e-10;
            failures += usize::from(!(bracket && interlace && root));
        }
    }
    Ok((failures == 0, format!("1681 zeros, {failures} failures")))
}

fn n0_monotone() -> Result<(bool, String)> {
    let mut failures = 0;
    for n in 1..=3 {
        for alpha in [0.5, 1.0, 1.5] {
            for l in [0.1, 0.2, 0.5] {
                let mut prev = usize::MAX;
                for t in [0.01, 0.05, 0.2, 1.0] {
                    let order = n0_bound_orthotope(n, alpha, l, t)?.n0_order;
                    failures += usize::from(order > prev);
                    prev = order;
                }
            }
        }
    }
    Ok((failures == 0, format!("27 (n, alpha, L) triples over T in {{0.01, 0.05, 0.2, 1}}, {failures} increases")))
}

/// Runs every check; failures are recorded, never raised.
pub fn run_checks() -> ChecksReport {
    let checks = vec![
        result("sine_lower_bound", sine_lower_bound()),
        result("kapteyn_bound", kapteyn()),
        result("f_monotone", f_monotone()),
        result("quantum_limit_normalization", quantum_normalization()),
        result("whispering_gallery_decay", whispering()),
        result("bessel_zero_brackets", zeros()),
        result("n0_bound_monotone_in_t", n0_monotone()),
    ];
    let passed = checks.iter().filter(|c| c.passed).count();
    ChecksReport { failed: checks.len() - passed, passed, checks }
}
