use std::hint::black_box;

use bottleneck_mimo::montecarlo::{mc_eig_expect, mc_eig_expect_seq};
use bottleneck_mimo::{capacity, par, McConfig, QuadratureSpec, SystemParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn eigen_expectation(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_eig_expect");
    group.sample_size(10);
    for (k, m) in [(2, 2), (4, 4), (4, 8)] {
        let params = SystemParams::from_snr_db(k, m, 10.0, 40.0).unwrap();
        let cfg = McConfig::new(1 << 16, 7).unwrap();
        let rho = params.rho();
        let g = move |l: f64| (rho * l).ln_1p();
        let label = format!("{k}x{m}");
        group.bench_with_input(BenchmarkId::new("parallel", &label), &cfg, |b, cfg| {
            b.iter(|| mc_eig_expect(black_box(&params), g, cfg))
        });
        group.bench_with_input(BenchmarkId::new("sequential", &label), &cfg, |b, cfg| {
            b.iter(|| mc_eig_expect_seq(black_box(&params), g, cfg))
        });
    }
    group.finish();
}

fn capacity_grid(c: &mut Criterion) {
    let quad = QuadratureSpec::default();
    let points: Vec<SystemParams> = (0..32)
        .map(|i| SystemParams::from_snr_db(4, 6, i as f64 * 1.5, 40.0).unwrap())
        .collect();
    let mut group = c.benchmark_group("capacity_grid");
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_indexed(points.len(), |i| capacity(&points[i], &quad).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_indexed_seq(points.len(), |i| capacity(&points[i], &quad).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, eigen_expectation, capacity_grid);
criterion_main!(benches);
