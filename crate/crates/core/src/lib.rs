//! Optimal observation domains for parabolic equations: spectral bases,
//! the maximin linear program, level-set extraction and stationarity sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod functional;
pub mod grid;
pub mod linalg;
pub mod optimizer;
pub mod problem;
pub mod quadrature;
pub mod special_fn;
pub mod spectral_basis;
pub mod stationarity;

pub use error::{Error, Result};
pub use functional::{gamma_weight, j_functional, randomized_constant, GramianMatrix, ModeCostMatrix};
pub use grid::{discretize, DensityField, Grid, GridKind};
pub use optimizer::{extract_level_set, solve_relaxed_truncated, OptimalDesign};
pub use spectral_basis::{Basis, BasisSpec, DomainKind, EigenMode, ModeIndex};
pub use problem::Problem;
pub use stationarity::{sweep, StationaritySweep};
