//! The randomized observability functional, its spectral truncation, and
//! the truncated Gramian.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::linalg::symmetric_eigen;
use crate::spectral_basis::EigenMode;

/// Largest admissible exponent `2 lambda T` before `exp` overflows.
pub const MAX_EXPONENT: f64 = 700.0;

/// Time-integrated energy factor `(exp(2 lambda T) - 1) / (2 lambda)`, equal
/// to `T` when `lambda = 0`.
pub fn gamma_weight(lambda: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("T must be > 0, got {t}")));
    }
    let x = 2.0 * lambda * t;
    if x > MAX_EXPONENT {
        return Err(Error::Overflow {
            mode: format!("lambda = {lambda}"),
            exponent: x,
        });
    }
    if (lambda * t).abs() < 1e-8 {
        return Ok(t + lambda * t * t + 2.0 / 3.0 * lambda * lambda * t * t * t);
    }
    Ok(x.exp_m1() / (2.0 * lambda))
}

/// `c[j][i] = gamma_j |phi_j(x_i)|^2 w_i`, rows are modes.
///
/// Modes whose weight overflows are left out and listed in `overflowed`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeCostMatrix {
    /// Position of each row in the mode list the matrix was built from.
    pub mode_positions: Vec<usize>,
    pub gammas: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub overflowed: Vec<usize>,
    n_cells: usize,
    data: Vec<f64>,
}

impl ModeCostMatrix {
    pub fn assemble(grid: &Grid, modes: &[EigenMode]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("empty mode list".into()));
        }
        let kept: Vec<usize> = (0..modes.len()).filter(|&j| modes[j].weight.is_some()).collect();
        let overflowed = (0..modes.len()).filter(|&j| modes[j].weight.is_none()).collect();
        let n_cells = grid.len();
        let rows: Vec<Vec<f64>> = kept
            .par_iter()
            .map(|&j| {
                let mode = &modes[j];
                let gamma = mode.weight.expect("filtered");
                grid.centers
                    .iter()
                    .zip(&grid.weights)
                    .map(|(c, w)| gamma * mode.sq_value(c) * w)
                    .collect()
            })
            .collect();
        Ok(Self {
            gammas: kept.iter().map(|&j| modes[j].weight.unwrap()).collect(),
            eigenvalues: kept.iter().map(|&j| modes[j].eigenvalue).collect(),
            mode_positions: kept,
            overflowed,
            n_cells,
            data: rows.concat(),
        })
    }

    /// Builds a matrix directly from rows (used by tests and small oracles).
    pub fn from_rows(rows: Vec<Vec<f64>>, gammas: Vec<f64>) -> Result<Self> {
        let n_cells = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || rows.iter().any(|r| r.len() != n_cells) || gammas.len() != rows.len() {
            return Err(Error::Config("ragged or empty cost rows".into()));
        }
        if rows.iter().flatten().any(|&c| !(c >= 0.0)) {
            return Err(Error::Precondition("cost entries must be nonnegative".into()));
        }
        Ok(Self {
            mode_positions: (0..rows.len()).collect(),
            eigenvalues: vec![f64::NAN; rows.len()],
            gammas,
            overflowed: Vec::new(),
            n_cells,
            data: rows.concat(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.gammas.len()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_cells..(j + 1) * self.n_cells]
    }

    /// `gamma_j int a |phi_j|^2` for every row.
    pub fn observations(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n_modes())
            .map(|j| self.row(j).iter().zip(a).map(|(c, a)| c * a).sum())
            .collect()
    }

    /// Sub-matrix with the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.n_cells);
        for &j in rows {
            data.extend_from_slice(self.row(j));
        }
        Self {
            mode_positions: rows.iter().map(|&j| self.mode_positions[j]).collect(),
            gammas: rows.iter().map(|&j| self.gammas[j]).collect(),
            eigenvalues: rows.iter().map(|&j| self.eigenvalues[j]).collect(),
            overflowed: Vec::new(),
            n_cells: self.n_cells,
            data,
        }
    }
}

/// `J_N(a) = min_j gamma_j int a |phi_j|^2` over the rows of `costs`, with
/// the lowest minimizing row.
pub fn j_functional(a: &DensityField, costs: &ModeCostMatrix) -> Result<(f64, usize)> {
    if costs.n_modes() == 0 {
        return Err(Error::Config("empty mode list".into()));
    }
    if a.len() != costs.n_cells() {
        return Err(Error::Precondition(format!(
            "density has {} cells, cost matrix has {}",
            a.len(),
            costs.n_cells()
        )));
    }
    let obs = costs.observations(&a.values);
    let (arg, value) = obs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bj, bv), (j, &v)| if v < bv { (j, v) } else { (bj, bv) });
    Ok((value, arg))
}

/// Randomized observability constant of a binary mask.
pub fn randomized_constant(mask: &DensityField, costs: &ModeCostMatrix) -> Result<f64> {
    if !mask.is_binary() {
        return Err(Error::Precondition("mask must take values in {0, 1}".into()));
    }
    Ok(j_functional(mask, costs)?.0)
}

/// Real symmetric truncated Gramian stored row-major.
#[derive(Debug, Clone, Serialize)]
pub struct GramianMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl GramianMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// `g_jk = (exp((lambda_j + lambda_k) T) - 1) / (lambda_j + lambda_k) * sum_i phi_j phi_k w_i a_i`.
pub fn truncated_gramian(
    grid: &Grid,
    mask: &DensityField,
    modes: &[EigenMode],
    t: f64,
) -> Result<GramianMatrix> {
    mask.check_on(grid)?;
    if modes.iter().any(|m| !m.is_scalar()) {
        return Err(Error::Precondition(
            "the truncated Gramian is only available for real scalar bases".into(),
        ));
    }
    let n = modes.len();
    let values: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|m| grid.centers.iter().map(|c| m.value(c).expect("scalar")).collect())
        .collect();
    let weighted: Vec<f64> = grid.weights.iter().zip(&mask.values).map(|(w, a)| w * a).collect();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for k in j..n {
            let s = modes[j].eigenvalue + modes[k].eigenvalue;
            if s * t > MAX_EXPONENT {
                return Err(Error::Overflow {
                    mode: format!("pair {} / {}", modes[j].index, modes[k].index),
                    exponent: s * t,
                });
            }
            let factor = if s == 0.0 { t } else { (s * t).exp_m1() / s };
            let inner: f64 = values[j]
                .iter()
                .zip(&values[k])
                .zip(&weighted)
                .map(|((a, b), w)| a * b * w)
                .sum();
            data[j * n + k] = factor * inner;
            data[k * n + j] = factor * inner;
        }
    }
    Ok(GramianMatrix { n, data })
}

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector.
pub fn min_eigenvalue(g: &GramianMatrix) -> Result<(f64, Vec<f64>)> {
    if g.n == 0 {
        return Err(Error::Precondition("empty matrix".into()));
    }
    let (values, mut vectors) = symmetric_eigen(g.n, &g.data)?;
    Ok((values[0], vectors.swap_remove(0)))
}
