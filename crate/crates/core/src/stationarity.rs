//! Truncation sweeps, detection of the order from which the optimal sets
//! stop changing, closed-form bounds on that order for the orthotope, and
//! the gap between the randomized and deterministic constants.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{count_rings, iterated_f, RingProfile};
use crate::error::{Error, Result};
use crate::functional::{
    gamma_weight, min_eigenvalue, randomized_constant, truncated_gramian, ModeCostMatrix,
    MAX_EXPONENT,
};
use crate::grid::{DensityField, Grid, GridKind};
use crate::optimizer::OptimalDesign;
use crate::problem::Problem;
use crate::spectral_basis::{DomainKind, EigenMode};

/// Default stationarity tolerance as a fraction of `|Omega|`.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub order: usize,
    pub design: OptimalDesign,
    pub mask: DensityField,
    /// Switching-field value at the fill boundary of the mask.
    pub level: f64,
    /// Radial structure of the mask on disk-family grids.
    pub rings: Option<RingProfile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaritySweep {
    pub entries: Vec<SweepEntry>,
    pub detected_n0: Option<usize>,
    /// Pairwise symmetric-difference measures between the entry masks.
    pub differences: Vec<Vec<f64>>,
    /// Absolute tolerance on the symmetric difference.
    pub tolerance: f64,
    pub horizon: f64,
    pub volume_fraction: f64,
    pub alpha: f64,
    pub domain: DomainKind,
    /// Why detection was not attempted, when it was not.
    pub detection_note: Option<String>,
}

/// `sum of w_i over cells where the two masks differ`.
pub fn symmetric_difference_measure(grid: &Grid, a: &DensityField, b: &DensityField) -> Result<f64> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::Precondition(format!(
            "masks of {} and {} cells on a grid of {}",
            a.len(),
            b.len(),
            grid.len()
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .zip(&grid.weights)
        .filter(|((x, y), _)| x != y)
        .fold(0.0, |s, (_, w)| s + w))
}

/// Radial mask of a disk-family mask: a polar ring counts as selected when
/// most of its angular cells are.
pub fn radial_mask(grid: &Grid, mask: &DensityField) -> Option<Vec<f64>> {
    match grid.kind {
        GridKind::Radial { .. } => Some(mask.values.clone()),
        GridKind::Polar { n_r, n_theta } => Some(
            (0..n_r)
                .map(|ir| {
                    let on = mask.values[ir * n_theta..(ir + 1) * n_theta]
                        .iter()
                        .filter(|&&v| v == 1.0)
                        .count();
                    if 2 * on > n_theta {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        ),
        GridKind::Tensor { .. } => None,
    }
}

/// Smallest order of `orders` from which every later mask stays within
/// `tolerance` of every other, with at least one later order as witness.
pub fn detect_stationarity(orders: &[usize], differences: &[Vec<f64>], tolerance: f64) -> Option<usize> {
    let n = orders.len();
    (0..n.saturating_sub(1)).find_map(|start| {
        let stable = (start..n).all(|a| (a..n).all(|b| differences[a][b] <= tolerance));
        stable.then_some(orders[start])
    })
}

/// Solves every order of `orders` on the shared grid of `problem` and
/// looks for stationarity at `tolerance_fraction * |Omega|`.
pub fn sweep(problem: &Problem, orders: &[usize], tolerance_fraction: f64) -> Result<StationaritySweep> {
    if orders.is_empty() {
        return Err(Error::Config("empty list of truncation orders".into()));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("truncation orders must be strictly increasing".into()));
    }
    if !(tolerance_fraction >= 0.0) {
        return Err(Error::Config("stationarity tolerance must be >= 0".into()));
    }
    let grid = &problem.grid;
    let solved: Vec<_> = orders
        .par_iter()
        .map(|&n| problem.solve_order(n, None))
        .collect::<Result<_>>()?;
    let entries: Vec<SweepEntry> = solved
        .into_iter()
        .map(|s| {
            let rings = radial_mask(grid, &s.level_set.mask).map(|m| count_rings(&m));
            SweepEntry {
                order: s.order,
                level: s.level_set.level,
                mask: s.level_set.mask,
                design: s.design,
                rings,
            }
        })
        .collect();
    let differences = entries
        .iter()
        .map(|a| {
            entries
                .iter()
                .map(|b| symmetric_difference_measure(grid, &a.mask, &b.mask))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let tolerance = tolerance_fraction * grid.total_measure();
    let spec = &problem.basis.spec;
    let (detected_n0, detection_note) = if spec.domain.is_disk_family() && spec.alpha < 0.5 {
        (
            None,
            Some("no finite truncation recovers the optimal set on the disk when alpha < 1/2".into()),
        )
    } else {
        (detect_stationarity(orders, &differences, tolerance), None)
    };
    Ok(StationaritySweep {
        entries,
        detected_n0,
        differences,
        tolerance,
        horizon: problem.basis.horizon,
        volume_fraction: problem.volume_fraction,
        alpha: spec.alpha,
        domain: spec.domain,
        detection_note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub n: usize,
    pub alpha: f64,
    pub volume_fraction: f64,
    pub horizon: f64,
    /// `F^[n](L pi^n)`.
    pub f_iterate: f64,
    /// Weight threshold `gamma_(1,..,1) / F^[n](L pi^n)`.
    pub bound_value: f64,
    /// Lexicographically smallest multi-index meeting the threshold.
    pub n0_multi_index: Vec<usize>,
    /// Its last entry, the truncation order it implies.
    pub n0_order: usize,
}

/// Closed-form sufficient truncation for the Dirichlet orthotope `(0, pi)^n`.
pub fn n0_bound_orthotope(n: usize, alpha: f64, volume_fraction: f64, horizon: f64) -> Result<BoundEvaluation> {
    if n < 1 {
        return Err(Error::Config("dimension must be >= 1".into()));
    }
    if !(volume_fraction > 0.0 && volume_fraction < 1.0) {
        return Err(Error::Config(format!("L must lie in (0, 1), got {volume_fraction}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
    }
    let f_iterate = iterated_f(volume_fraction * PI.powi(n as i32), n)?;
    let lambda = |j: usize| ((n - 1) as f64 + (j * j) as f64).powf(alpha);
    let bound_value = gamma_weight(lambda(1), horizon)? / f_iterate;
    let mut j = 1;
    loop {
        let l = lambda(j);
        if 2.0 * l * horizon > MAX_EXPONENT || gamma_weight(l, horizon)? >= bound_value {
            break;
        }
        j += 1;
    }
    let mut multi = vec![1; n];
    multi[n - 1] = j;
    Ok(BoundEvaluation {
        n,
        alpha,
        volume_fraction,
        horizon,
        f_iterate,
        bound_value,
        n0_multi_index: multi,
        n0_order: j,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// `C_T,rand` of the mask over the given modes.
    pub randomized: f64,
    /// Smallest eigenvalue of the truncated Gramian.
    pub deterministic: f64,
    pub gap: f64,
    /// Unit vector attaining the smallest Rayleigh quotient.
    pub witness: Vec<f64>,
}

/// Compares the randomized constant of `mask` with the deterministic
/// constant of the same truncation.
pub fn strict_gap_report(grid: &Grid, mask: &DensityField, modes: &[EigenMode], horizon: f64) -> Result<GapReport> {
    mask.check_on(grid)?;
    let costs = ModeCostMatrix::assemble(grid, modes)?;
    if !costs.overflowed.is_empty() {
        return Err(Error::Overflow {
            mode: format!("{} mode(s) with overflowing weight", costs.overflowed.len()),
            exponent: MAX_EXPONENT,
        });
    }
    let randomized = randomized_constant(mask, &costs)?;
    let gram = truncated_gramian(grid, mask, modes, horizon)?;
    let (deterministic, witness) = min_eigenvalue(&gram)?;
    Ok(GapReport { randomized, deterministic, gap: randomized - deterministic, witness })
}

/// Multipliers summed over groups of (numerically) equal eigenvalues:
/// `(eigenvalue, total multiplier, rows)`.
pub fn grouped_multipliers(design: &OptimalDesign, eigenvalues: &[f64]) -> Vec<(f64, f64, Vec<usize>)> {
    let mut groups: Vec<(f64, f64, Vec<usize>)> = Vec::new();
    for (row, (&alpha, &lambda)) in design.multipliers.iter().zip(eigenvalues).enumerate() {
        match groups.last_mut() {
            Some((l, total, rows)) if (lambda - *l).abs() <= 1e-12 * l.abs().max(1.0) => {
                *total += alpha;
                rows.push(row);
            }
            _ => groups.push((lambda, alpha, vec![row])),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::tensor_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_differences() {
        let g = tensor_grid(1, 4);
        let a = DensityField::new(vec![1.0, 0.0, 1.0, 0.0]);
        let b = DensityField::new(vec![1.0, 1.0, 0.0, 0.0]);
        let c = DensityField::new(vec![0.0, 1.0, 0.0, 1.0]);
        let same = symmetric_difference_measure(&g, &a, &a).unwrap();
        assert!(same == 0.0 && same.is_sign_positive());
        assert_abs_diff_eq!(symmetric_difference_measure(&g, &a, &b).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(symmetric_difference_measure(&g, &a, &c).unwrap(), PI, epsilon = 1e-15);
        assert!(symmetric_difference_measure(&g, &a, &DensityField::new(vec![0.0; 3])).is_err());
    }

    #[test]
    fn detection_needs_a_later_witness() {
        let d = vec![vec![0.0, 5.0, 5.0], vec![5.0, 0.0, 0.1], vec![5.0, 0.1, 0.0]];
        assert_eq!(detect_stationarity(&[1, 2, 3], &d, 0.2), Some(2));
        assert_eq!(detect_stationarity(&[1, 2, 3], &d, 0.01), None);
        assert_eq!(detect_stationarity(&[4], &[vec![0.0]], 0.1), None);
    }

    #[test]
    fn rejects_unsorted_orders() {
        let spec = crate::BasisSpec::new(DomainKind::Interval, 1.0, 3);
        let p = Problem::new(&spec, 0.05, 0.2, 32, 3).unwrap();
        assert!(sweep(&p, &[2, 1], 0.02).is_err());
        assert!(sweep(&p, &[], 0.02).is_err());
    }

    #[test]
    fn orthotope_bound_shape() {
        let b = n0_bound_orthotope(2, 1.0, 0.2, 0.05).unwrap();
        assert_eq!(b.n0_multi_index[0], 1);
        assert_eq!(b.n0_multi_index[1], b.n0_order);
        assert!(b.f_iterate > 0.0);
        assert!(n0_bound_orthotope(1, 1.0, 1.0, 0.05).is_err());
    }

    #[test]
    fn grouping_equal_eigenvalues() {
        let spec = crate::BasisSpec::new(DomainKind::Orthotope { dim: 2 }, 1.0, 2);
        let p = Problem::new(&spec, 0.05, 0.2, 32, 2).unwrap();
        let s = p.solve_order(2, None).unwrap();
        let eig: Vec<f64> = s.rows.iter().map(|&r| p.costs.eigenvalues[r]).collect();
        let g = grouped_multipliers(&s.design, &eig);
        assert_eq!(g.iter().map(|x| x.2.len()).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert_abs_diff_eq!(g.iter().map(|x| x.1).sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
