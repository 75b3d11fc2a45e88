//! Shared fixtures for the benchmarks.

use parobs_core::spectral_basis::{BasisSpec, DomainKind};
use parobs_core::Problem;

/// Default-regime problem (`T = 0.05`, `L = 0.2`) on `domain`.
pub fn fixture(domain: DomainKind, alpha: f64, resolution: usize, max_order: usize) -> Problem {
    Problem::new(&BasisSpec::new(domain, alpha, max_order), 0.05, 0.2, resolution, max_order)
        .expect("benchmark problem builds")
}
