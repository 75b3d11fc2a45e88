use criterion::{criterion_group, criterion_main, Criterion};
use parobs_bench::fixture;
use parobs_core::spectral_basis::DomainKind;
use parobs_core::stationarity::sweep;

fn solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("solves");
    g.sample_size(10);
    let square = fixture(DomainKind::Orthotope { dim: 2 }, 1.0, 64, 6);
    g.bench_function("square 64 N=6", |b| b.iter(|| square.solve_order(6, None).unwrap()));
    let radial = fixture(DomainKind::DiskRadial, 0.15, 1024, 8);
    g.bench_function("radial 1024 alpha=0.15 N=8", |b| b.iter(|| radial.solve_order(8, None).unwrap()));
    let interval = fixture(DomainKind::Interval, 1.0, 512, 12);
    let orders: Vec<usize> = (1..=12).collect();
    g.bench_function("interval 512 sweep 1..12", |b| b.iter(|| sweep(&interval, &orders, 0.02).unwrap()));
    g.finish();
}

criterion_group!(benches, solves);
criterion_main!(benches);
