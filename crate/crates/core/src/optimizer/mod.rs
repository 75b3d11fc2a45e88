//! Exact solution of the relaxed truncated design problem, the switching
//! field built from the optimal multipliers, and bathtub extraction of the
//! optimal set.

mod enumerate;
mod simplex;

pub use enumerate::solve_by_enumeration;
pub use simplex::{solve_maximin, LpSolution};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::ModeCostMatrix;
use crate::grid::{DensityField, Grid, GridKind};

/// Multipliers below this are reported as inactive.
pub const ACTIVE_THRESHOLD: f64 = 1e-9;
const FRACTIONAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    /// Dual objective minus primal objective.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalDesign {
    pub density: DensityField,
    pub objective: f64,
    /// One multiplier per row of the cost matrix that was solved.
    pub multipliers: Vec<f64>,
    /// Position of each row in the originating mode list.
    pub mode_positions: Vec<usize>,
    pub switching_field: Vec<f64>,
    pub level: f64,
    /// Rows with a positive multiplier.
    pub active_modes: Vec<usize>,
    pub fractional_cell_count: usize,
    /// Rows dropped before the LP because they can never bind.
    pub pruned: Vec<usize>,
    pub target_measure: f64,
    pub iterations: usize,
    pub residuals: Residuals,
}

/// Mass of the `measure` best (or worst) cells of `row` when filled
/// fractionally.
fn bathtub_mass(row: &[f64], weights: &[f64], measure: f64, best: bool) -> f64 {
    let mut order: Vec<usize> = (0..row.len()).collect();
    let density = |i: usize| row[i] / weights[i];
    order.sort_by(|&i, &k| {
        let c = density(k).total_cmp(&density(i));
        if best {
            c
        } else {
            c.reverse()
        }
    });
    let mut left = measure;
    let mut mass = 0.0;
    for i in order {
        if left <= 0.0 {
            break;
        }
        let take = weights[i].min(left);
        mass += density(i) * take;
        left -= take;
    }
    mass
}

/// Rows that can be dropped without changing the LP optimum: their value
/// at the worst admissible density already exceeds an upper bound on the
/// optimum.
pub fn prunable_rows(costs: &ModeCostMatrix, weights: &[f64], measure: f64) -> Vec<usize> {
    let upper = (0..costs.n_modes())
        .map(|j| bathtub_mass(costs.row(j), weights, measure, true))
        .fold(f64::INFINITY, f64::min);
    (0..costs.n_modes())
        .filter(|&j| bathtub_mass(costs.row(j), weights, measure, false) > upper * (1.0 + 1e-9))
        .collect()
}

/// `psi_i = sum_j alpha_j c[j][i] / w_i`.
pub fn switching_field(costs: &ModeCostMatrix, multipliers: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut psi = vec![0.0; weights.len()];
    for (j, &alpha) in multipliers.iter().enumerate() {
        if alpha == 0.0 {
            continue;
        }
        for (p, c) in psi.iter_mut().zip(costs.row(j)) {
            *p += alpha * c;
        }
    }
    for (p, w) in psi.iter_mut().zip(weights) {
        *p /= w;
    }
    psi
}

/// `xi M + sum_i w_i max(0, psi_i - xi)`, the dual objective at level `xi`.
fn dual_objective(psi: &[f64], weights: &[f64], level: f64, measure: f64) -> f64 {
    level * measure
        + psi
            .iter()
            .zip(weights)
            .map(|(p, w)| w * (p - level).max(0.0))
            .sum::<f64>()
}

/// Maximizes `J_N` over relaxed densities of measure `L |Omega|` on `grid`.
pub fn solve_relaxed_truncated(
    grid: &Grid,
    costs: &ModeCostMatrix,
    volume_fraction: f64,
) -> Result<OptimalDesign> {
    solve_relaxed_truncated_with_hint(grid, costs, volume_fraction, None)
}

/// As [`solve_relaxed_truncated`], starting the simplex from the cells
/// ranked by `hint` (for example the switching field of a nearby problem).
pub fn solve_relaxed_truncated_with_hint(
    grid: &Grid,
    costs: &ModeCostMatrix,
    volume_fraction: f64,
    hint: Option<&[f64]>,
) -> Result<OptimalDesign> {
    if !(volume_fraction > 0.0 && volume_fraction < 1.0) {
        return Err(Error::Config(format!(
            "L must lie in (0, 1), got {volume_fraction}"
        )));
    }
    if costs.n_cells() != grid.len() {
        return Err(Error::Precondition(format!(
            "cost matrix has {} cells, grid has {}",
            costs.n_cells(),
            grid.len()
        )));
    }
    if costs.n_modes() == 0 {
        return Err(Error::Config("no mode rows to optimize over".into()));
    }
    for j in 0..costs.n_modes() {
        if !costs.row(j).iter().any(|&c| c > 0.0) {
            return Err(Error::Precondition(format!("cost row {j} has no positive entry")));
        }
    }
    let weights = &grid.weights;
    let measure = volume_fraction * grid.total_measure();

    let pruned = prunable_rows(costs, weights, measure);
    let kept: Vec<usize> = (0..costs.n_modes()).filter(|j| !pruned.contains(j)).collect();
    let rows: Vec<&[f64]> = kept.iter().map(|&j| costs.row(j)).collect();
    let lp = solve_maximin(&rows, weights, measure, hint)?;

    let mut multipliers = vec![0.0; costs.n_modes()];
    for (&j, &alpha) in kept.iter().zip(&lp.multipliers) {
        multipliers[j] = alpha;
    }
    let psi = switching_field(costs, &multipliers, weights);
    let dual = dual_objective(&psi, weights, lp.level, measure);
    let active_modes = (0..costs.n_modes())
        .filter(|&j| multipliers[j] > ACTIVE_THRESHOLD)
        .collect();
    let fractional_cell_count = lp
        .a
        .iter()
        .filter(|&&v| v > FRACTIONAL_TOL && v < 1.0 - FRACTIONAL_TOL)
        .count();
    Ok(OptimalDesign {
        density: DensityField::new(lp.a),
        objective: lp.objective,
        multipliers,
        mode_positions: costs.mode_positions.clone(),
        switching_field: psi,
        level: lp.level,
        active_modes,
        fractional_cell_count,
        pruned,
        target_measure: measure,
        iterations: lp.iterations,
        residuals: Residuals {
            primal: lp.primal_residual,
            dual: lp.dual_residual,
            gap: dual - lp.objective,
        },
    })
}

/// The radial reduction on the disk: same LP, measure `L/2` on `(0, 1)`
/// with weights `r dr`.
pub fn solve_radial_disk(
    grid: &Grid,
    costs: &ModeCostMatrix,
    volume_fraction: f64,
) -> Result<OptimalDesign> {
    if !matches!(grid.kind, GridKind::Radial { .. }) {
        return Err(Error::Precondition("the radial solve needs a radial grid".into()));
    }
    solve_relaxed_truncated(grid, costs, volume_fraction)
}

/// Lifts a radial density to a polar grid with the same radial cells.
pub fn lift_radial(radial: &DensityField, polar: &Grid) -> Result<DensityField> {
    let GridKind::Polar { n_r, n_theta } = polar.kind else {
        return Err(Error::Precondition("lifting needs a polar grid".into()));
    };
    if radial.len() != n_r {
        return Err(Error::Precondition(format!(
            "radial density has {} cells, polar grid has {n_r} rings",
            radial.len()
        )));
    }
    let values = radial
        .values
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, n_theta))
        .collect();
    Ok(DensityField::new(values))
}

/// Binary optimal set read off the switching field.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSet {
    pub mask: DensityField,
    /// Switching-field value of the last cell filled.
    pub level: f64,
    /// Set when the switching field is constant, so the mask is arbitrary.
    pub degenerate: bool,
}

/// Fills cells by decreasing switching field (ties by ascending index) up
/// to measure `L |Omega|`.
pub fn extract_level_set(design: &OptimalDesign, grid: &Grid, volume_fraction: f64) -> LevelSet {
    level_set_of(&design.switching_field, &grid.weights, volume_fraction)
}

/// [`extract_level_set`] on a bare field.
pub fn level_set_of(psi: &[f64], weights: &[f64], volume_fraction: f64) -> LevelSet {
    let target = volume_fraction * weights.iter().sum::<f64>();
    let mut order: Vec<usize> = (0..psi.len()).collect();
    order.sort_by(|&i, &k| psi[k].total_cmp(&psi[i]).then(i.cmp(&k)));
    let (lo, hi) = psi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let degenerate = hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE);
    if degenerate {
        log::warn!("switching field is constant; the optimal set is fixed by the index tie-break");
    }
    let mut values = vec![0.0; psi.len()];
    let mut filled = 0.0;
    let mut level = hi;
    for i in order {
        if filled + weights[i] > target * (1.0 + 1e-12) {
            break;
        }
        filled += weights[i];
        values[i] = 1.0;
        level = psi[i];
    }
    LevelSet { mask: DensityField::new(values), level, degenerate }
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleReport {
    pub passed: bool,
    /// `|1 - sum alpha|` and the most negative multiplier.
    pub multiplier_residual: f64,
    /// Largest relative gap between an active row's value and the objective.
    pub active_residual: f64,
    /// Largest multiplier of a row that is strictly slack.
    pub slack_multiplier: f64,
    /// `max_a sum_j alpha_j gamma_j int a phi_j^2 - objective`, relative.
    pub minimax_gap: f64,
}

/// Checks complementary slackness and max-min = min-max for a solved design.
pub fn saddle_check(design: &OptimalDesign, costs: &ModeCostMatrix, grid: &Grid) -> SaddleReport {
    let obj = design.objective;
    let values = costs.observations(&design.density.values);
    let sum: f64 = design.multipliers.iter().sum();
    let most_negative = design.multipliers.iter().fold(0.0f64, |m, &a| m.max(-a));
    let multiplier_residual = (1.0 - sum).abs().max(most_negative);
    let mut active_residual = 0.0f64;
    let mut slack_multiplier = 0.0f64;
    for (j, (&alpha, &v)) in design.multipliers.iter().zip(&values).enumerate() {
        if design.active_modes.contains(&j) {
            active_residual = active_residual.max((v - obj).abs() / obj);
        }
        if v > obj * (1.0 + 1e-6) {
            slack_multiplier = slack_multiplier.max(alpha);
        }
    }
    let psi = switching_field(costs, &design.multipliers, &grid.weights);
    let measure = design.target_measure;
    let best = bathtub_mass(
        &psi.iter().zip(&grid.weights).map(|(p, w)| p * w).collect::<Vec<_>>(),
        &grid.weights,
        measure,
        true,
    );
    let minimax_gap = (best - obj).abs() / obj.abs().max(f64::MIN_POSITIVE);
    SaddleReport {
        passed: multiplier_residual <= 1e-8
            && active_residual <= 1e-6
            && slack_multiplier <= 1e-8
            && minimax_gap <= 1e-8,
        multiplier_residual,
        active_residual,
        slack_multiplier,
        minimax_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{gamma_weight, ModeCostMatrix};
    use crate::grid::tensor_grid;
    use crate::spectral_basis::{make_orthotope_basis, BasisSpec, DomainKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn interval_costs(n_cells: usize, order: usize) -> (Grid, ModeCostMatrix) {
        let grid = tensor_grid(1, n_cells);
        let spec = BasisSpec::new(DomainKind::Interval, 1.0, order);
        let modes = make_orthotope_basis(&spec, 1, 0.05).unwrap();
        let costs = ModeCostMatrix::assemble(&grid, &modes).unwrap();
        (grid, costs)
    }

    #[test]
    fn four_cell_first_mode() {
        let (grid, costs) = interval_costs(4, 1);
        let d = solve_relaxed_truncated(&grid, &costs, 0.5).unwrap();
        for (v, e) in d.density.values.iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
        let s = (3.0 * PI / 8.0).sin();
        let expected = gamma_weight(1.0, 0.05).unwrap() * (2.0 / PI) * (PI / 4.0) * 2.0 * s * s;
        assert_abs_diff_eq!(d.objective, expected, epsilon = 1e-14);
        assert_eq!(d.multipliers, vec![1.0]);
        assert_eq!(d.active_modes, vec![0]);
        assert!(saddle_check(&d, &costs, &grid).passed);
    }

    #[test]
    fn level_set_top_two() {
        let ls = level_set_of(&[3.0, 1.0, 2.0], &[1.0; 3], 2.0 / 3.0);
        assert_eq!(ls.mask.values, vec![1.0, 0.0, 1.0]);
        assert_eq!(ls.level, 2.0);
        assert!(!ls.degenerate);
    }

    #[test]
    fn level_set_constant_field() {
        let ls = level_set_of(&[1.0; 5], &[1.0; 5], 0.5);
        assert_eq!(ls.mask.values, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(ls.degenerate);
    }

    #[test]
    fn interval_design_is_a_saddle() {
        let (grid, costs) = interval_costs(200, 6);
        let d = solve_relaxed_truncated(&grid, &costs, 0.3).unwrap();
        let rep = saddle_check(&d, &costs, &grid);
        assert!(rep.passed, "{rep:?}");
        assert!(d.fractional_cell_count <= costs.n_modes());
        assert!(d.residuals.gap.abs() <= 1e-9 * (1.0 + d.objective), "{:?}", d.residuals);
        let g1 = costs.gammas[0];
        assert!(d.objective >= 0.3 * g1 * (1.0 - 1e-9) && d.objective <= g1);
    }

    #[test]
    fn rejects_bad_fraction() {
        let (grid, costs) = interval_costs(16, 2);
        assert!(solve_relaxed_truncated(&grid, &costs, 1.0).is_err());
        assert!(solve_relaxed_truncated(&grid, &costs, 0.0).is_err());
    }

    #[test]
    fn pruning_keeps_binding_rows() {
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0], vec![10.0, 10.0, 10.0, 10.0]];
        let costs = ModeCostMatrix::from_rows(rows, vec![1.0, 1.0]).unwrap();
        assert_eq!(prunable_rows(&costs, &[1.0; 4], 2.0), vec![1]);
    }
}
