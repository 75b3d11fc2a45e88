//! Midpoint discretizations of the supported domains and relaxed densities
//! living on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{DomainKind, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GridKind {
    /// Tensor grid with `n` cells per axis; axis 0 varies fastest.
    Tensor { dim: usize, n: usize },
    /// Polar tensor grid on the unit disk; cell `ir * n_theta + it`.
    Polar { n_r: usize, n_theta: usize },
    /// Radial cells on `(0, 1)` weighted by `r dr`.
    Radial { n_r: usize },
}

/// Cell centers and positive quadrature weights.
#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: DomainKind,
    pub kind: GridKind,
    pub centers: Vec<Point>,
    pub weights: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i f_i w_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Builds the midpoint grid of `domain` with `resolution` cells per axis.
pub fn discretize(domain: DomainKind, resolution: usize) -> Result<Grid> {
    if resolution < 8 {
        return Err(Error::Config(format!(
            "resolution must be >= 8 per axis, got {resolution}"
        )));
    }
    let grid = match domain {
        DomainKind::Interval => tensor(domain, 1, resolution),
        DomainKind::Orthotope { dim } => {
            if dim == 0 || dim > 3 {
                return Err(Error::Config(format!("unsupported orthotope dimension {dim}")));
            }
            tensor(domain, dim, resolution)
        }
        DomainKind::Disk | DomainKind::StokesDisk => polar(domain, resolution, resolution),
        DomainKind::DiskRadial => {
            let h = 1.0 / resolution as f64;
            let centers: Vec<Point> = (0..resolution)
                .map(|i| [(i as f64 + 0.5) * h, 0.0, 0.0])
                .collect();
            let weights = centers.iter().map(|c| c[0] * h).collect();
            Grid {
                domain,
                kind: GridKind::Radial { n_r: resolution },
                centers,
                weights,
            }
        }
    };
    Ok(grid)
}

/// Tensor midpoint grid on `(0, pi)^dim` without the resolution floor of
/// [`discretize`]; small grids are useful for exhaustive checks.
pub fn tensor_grid(dim: usize, n: usize) -> Grid {
    let domain = if dim == 1 {
        DomainKind::Interval
    } else {
        DomainKind::Orthotope { dim }
    };
    tensor(domain, dim, n.max(1))
}

fn tensor(domain: DomainKind, dim: usize, n: usize) -> Grid {
    let h = PI / n as f64;
    let total = n.pow(dim as u32);
    let mut centers = Vec::with_capacity(total);
    for flat in 0..total {
        let mut p = [0.0; 3];
        let mut rest = flat;
        for slot in p.iter_mut().take(dim) {
            *slot = ((rest % n) as f64 + 0.5) * h;
            rest /= n;
        }
        centers.push(p);
    }
    Grid {
        domain,
        kind: GridKind::Tensor { dim, n },
        centers,
        weights: vec![h.powi(dim as i32); total],
    }
}

/// Polar grid with `n_r x n_theta` cells.
pub fn polar(domain: DomainKind, n_r: usize, n_theta: usize) -> Grid {
    let dr = 1.0 / n_r as f64;
    let dt = 2.0 * PI / n_theta as f64;
    let mut centers = Vec::with_capacity(n_r * n_theta);
    let mut weights = Vec::with_capacity(n_r * n_theta);
    for ir in 0..n_r {
        let r = (ir as f64 + 0.5) * dr;
        for it in 0..n_theta {
            centers.push([r, (it as f64 + 0.5) * dt, 0.0]);
            weights.push(r * dr * dt);
        }
    }
    Grid {
        domain,
        kind: GridKind::Polar { n_r, n_theta },
        centers,
        weights,
    }
}

/// A relaxed design: one value in `[0, 1]` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self { values: vec![value; grid.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self, grid: &Grid) -> f64 {
        grid.integrate(&self.values)
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn check_on(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "density has {} cells, grid has {}",
                self.len(),
                grid.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Precondition(format!("density value {v} outside [0, 1]")));
        }
        Ok(())
    }
}
