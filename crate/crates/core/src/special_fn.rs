//! Bessel functions of the first kind of integer order, their derivatives
//! and their positive zeros.
//!
//! `J_n(x)` is evaluated by the ascending series for small arguments and by
//! Miller's backward recurrence, normalized with the Neumann sum
//! `J_0 + 2 * sum_k J_2k = 1`, everywhere else. Both routes keep the absolute
//! error below `1e-12` for `x <= 1e3` and orders up to a few hundred.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Arguments at or below this value use the power series.
const SERIES_LIMIT: f64 = 12.0;
/// Rescaling threshold for the backward recurrence.
const RESCALE_ABOVE: f64 = 1e200;
const ZERO_TOL: f64 = 1e-10;
const SCAN_STEP: f64 = PI / 8.0;

/// `J_order(x)` for `x >= 0`.
pub fn bessel_j(order: usize, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    if !x.is_finite() {
        return Err(Error::Domain("bessel_j requires a finite argument".into()));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let value = if x <= SERIES_LIMIT {
        series(order, x)
    } else {
        miller(order, x)
    };
    if !value.is_finite() {
        return Err(Error::Precision(format!(
            "J_{order}({x}) evaluated to a non-finite value"
        )));
    }
    Ok(value)
}

/// `J'_order(x)` via `2 J'_n = J_{n-1} - J_{n+1}` and `J'_0 = -J_1`.
pub fn bessel_j_prime(order: usize, x: f64) -> Result<f64> {
    if order == 0 {
        return Ok(-bessel_j(1, x)?);
    }
    Ok(0.5 * (bessel_j(order - 1, x)? - bessel_j(order + 1, x)?))
}

fn series(order: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let ln_first = order as f64 * half.ln() - ln_factorial(order);
    if ln_first < -745.0 {
        return 0.0;
    }
    let q = half * half;
    let mut term = ln_first.exp();
    let mut sum = term;
    let n = order as f64;
    for k in 0..500 {
        let k1 = k as f64 + 1.0;
        term *= -q / (k1 * (k1 + n));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn miller(order: usize, x: f64) -> f64 {
    let top = order.max(x.ceil() as usize);
    let mut start = top + 20 + (10.0 * (top as f64).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut current = 1.0; // J_k, unnormalized
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx == order {
            result = current;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            norm *= s;
            result *= s;
        }
    }
    norm += current;
    result / norm
}

/// The first `count` positive zeros of `J_order`, in increasing order.
///
/// Zeros are bracketed by a sign scan from `x = order` (where `J_order` is
/// still positive) with step `pi/8`, refined by bisection and polished with
/// one Newton step when the derivative is not too small. Every zero is
/// checked against the bracket `[order + rank, pi * (order + rank)]`.
pub fn bessel_zeros(order: usize, count: usize) -> Result<Vec<f64>> {
    let mut zeros = Vec::with_capacity(count);
    if count == 0 {
        return Ok(zeros);
    }
    let limit = PI * (order + count) as f64 + SCAN_STEP;
    let mut a = order as f64;
    let mut fa = bessel_j(order, a)?;
    while zeros.len() < count {
        let rank = zeros.len() + 1;
        let b = a + SCAN_STEP;
        if b > limit {
            return Err(Error::RootFinding {
                order,
                rank,
                lo: (order + rank) as f64,
                hi: PI * (order + rank) as f64,
            });
        }
        let fb = bessel_j(order, b)?;
        if fb == 0.0 || fa.signum() != fb.signum() {
            let z = refine(order, a, b, fa)?;
            check_zero(order, rank, z)?;
            zeros.push(z);
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

/// The `rank`-th positive zero of `J_order` (rank starts at 1).
pub fn bessel_zero(order: usize, rank: usize) -> Result<f64> {
    if rank == 0 {
        return Err(Error::Domain("zero rank starts at 1".into()));
    }
    Ok(bessel_zeros(order, rank)?[rank - 1])
}

fn refine(order: usize, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        if b - a <= 1e-14 * b.max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = bessel_j(order, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let mut z = 0.5 * (a + b);
    let d = bessel_j_prime(order, z)?;
    if d.abs() > 1e-4 {
        let polished = z - bessel_j(order, z)? / d;
        if polished >= a && polished <= b {
            z = polished;
        }
    }
    Ok(z)
}

fn check_zero(order: usize, rank: usize, z: f64) -> Result<()> {
    let lo = (order + rank) as f64;
    let hi = PI * (order + rank) as f64;
    if z < lo || z > hi {
        return Err(Error::RootFinding { order, rank, lo, hi });
    }
    let value = bessel_j(order, z)?;
    let slope = bessel_j_prime(order, z)?;
    if value.abs() > ZERO_TOL * slope.abs().max(1.0) {
        return Err(Error::Precision(format!(
            "zero {rank} of J_{order} leaves residual {value:e}"
        )));
    }
    Ok(())
}

/// Memoized zeros `z_{j,k}` for `j <= max_order`, `1 <= k <= max_rank`.
///
/// Built once, read-only afterwards.
#[derive(Debug, Clone, Serialize)]
pub struct BesselZeroTable {
    max_order: usize,
    max_rank: usize,
    zeros: Vec<f64>,
}

impl BesselZeroTable {
    pub fn build(max_order: usize, max_rank: usize) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..=max_order)
            .into_par_iter()
            .map(|j| bessel_zeros(j, max_rank))
            .collect::<Result<_>>()?;
        Ok(Self {
            max_order,
            max_rank,
            zeros: rows.into_iter().flatten().collect(),
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    /// `z_{order, rank}` if it is stored.
    pub fn get(&self, order: usize, rank: usize) -> Option<f64> {
        if order > self.max_order || rank == 0 || rank > self.max_rank {
            return None;
        }
        Some(self.zeros[order * self.max_rank + rank - 1])
    }
}
