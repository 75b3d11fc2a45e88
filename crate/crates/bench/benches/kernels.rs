use criterion::{criterion_group, criterion_main, Criterion};
use parobs_core::functional::ModeCostMatrix;
use parobs_core::grid::discretize;
use parobs_core::special_fn::{bessel_j, BesselZeroTable};
use parobs_core::spectral_basis::{Basis, BasisSpec, DomainKind};
use std::hint::black_box;

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_j order 0..40 at 25 points", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for n in 0..40 {
                for i in 0..25 {
                    s += bessel_j(n, black_box(0.8 * i as f64 + 0.1)).unwrap();
                }
            }
            s
        })
    });
    c.bench_function("zero table 16x16", |b| b.iter(|| BesselZeroTable::build(black_box(16), 16).unwrap()));
}

fn costs(c: &mut Criterion) {
    let grid = discretize(DomainKind::Orthotope { dim: 2 }, 128).unwrap();
    let basis = Basis::build(&BasisSpec::new(DomainKind::Orthotope { dim: 2 }, 1.0, 6), 0.05).unwrap();
    c.bench_function("cost matrix square 128 N=6", |b| {
        b.iter(|| ModeCostMatrix::assemble(black_box(&grid), &basis.modes).unwrap())
    });
}

criterion_group!(benches, bessel, costs);
criterion_main!(benches);
