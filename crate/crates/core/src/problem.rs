//! A discretized design problem: one grid, one basis built at the largest
//! truncation of interest, and the matching cost matrix. Lower truncation
//! orders reuse it by slicing rows.

use crate::error::{Error, Result};
use crate::functional::ModeCostMatrix;
use crate::grid::{discretize, Grid};
use crate::optimizer::{
    extract_level_set, solve_relaxed_truncated_with_hint, switching_field, LevelSet,
    OptimalDesign,
};
use crate::spectral_basis::{Basis, BasisSpec, Truncation};

#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub basis: Basis,
    pub costs: ModeCostMatrix,
    pub volume_fraction: f64,
    /// Half-resolution copy whose optimal multipliers seed the simplex here.
    coarse: Option<Box<Problem>>,
}

/// Grids with fewer cells than this are solved directly.
const DIRECT_SOLVE_CELLS: usize = 4096;

/// A solved truncation.
#[derive(Debug, Clone)]
pub struct Solved {
    pub order: usize,
    /// Rows of the problem's cost matrix used at this order.
    pub rows: Vec<usize>,
    pub design: OptimalDesign,
    pub level_set: LevelSet,
}

impl Problem {
    /// Builds the grid at `resolution` and the basis up to `max_order`.
    ///
    /// Disk-family radial profiles are normalized with as many nodes as the
    /// grid has radial cells, so the discrete modes are orthonormal on it.
    pub fn new(
        spec: &BasisSpec,
        horizon: f64,
        volume_fraction: f64,
        resolution: usize,
        max_order: usize,
    ) -> Result<Self> {
        if !(volume_fraction > 0.0 && volume_fraction < 1.0) {
            return Err(Error::Config(format!(
                "L must lie in (0, 1), got {volume_fraction}"
            )));
        }
        let mut spec = spec.clone();
        spec.truncation = Truncation::order(max_order);
        if spec.domain.is_disk_family() {
            spec.radial_nodes = resolution;
        }
        let grid = discretize(spec.domain, resolution)?;
        let basis = Basis::build(&spec, horizon)?;
        let costs = ModeCostMatrix::assemble(&grid, &basis.modes)?;
        let coarse = if grid.len() > DIRECT_SOLVE_CELLS && resolution / 2 >= 16 {
            let c = Problem::new(&spec, horizon, volume_fraction, resolution / 2, max_order)?;
            (c.costs.n_modes() == costs.n_modes()).then(|| Box::new(c))
        } else {
            None
        };
        Ok(Self { grid, basis, costs, volume_fraction, coarse })
    }

    pub fn max_order(&self) -> usize {
        self.basis.spec.truncation.j_max
    }

    /// Cost-matrix rows of the truncation of order `n`.
    pub fn rows_for_order(&self, n: usize) -> Vec<usize> {
        (0..self.costs.n_modes())
            .filter(|&r| self.basis.modes[self.costs.mode_positions[r]].index.within_order(n))
            .collect()
    }

    pub fn solve_order(&self, n: usize, hint: Option<&[f64]>) -> Result<Solved> {
        if n == 0 || n > self.max_order() {
            return Err(Error::Config(format!(
                "order {n} outside 1..={}",
                self.max_order()
            )));
        }
        let rows = self.rows_for_order(n);
        if rows.is_empty() {
            return Err(Error::Config(format!(
                "no mode of order {n} has a finite weight"
            )));
        }
        let costs = self.costs.select(&rows);
        let seeded;
        let hint = match (hint, &self.coarse) {
            (None, Some(coarse)) => {
                let solved = coarse.solve_order(n, None)?;
                seeded = switching_field(&costs, &solved.design.multipliers, &self.grid.weights);
                Some(seeded.as_slice())
            }
            _ => hint,
        };
        let design =
            solve_relaxed_truncated_with_hint(&self.grid, &costs, self.volume_fraction, hint)?;
        let level_set = extract_level_set(&design, &self.grid, self.volume_fraction);
        Ok(Solved { order: n, rows, design, level_set })
    }
}
