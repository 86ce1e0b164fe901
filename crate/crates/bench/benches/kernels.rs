use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use speclab_core::blockops::{essential_limit_estimate, BlockSequenceSpec, Example1Params};
use speclab_core::fourier_pde::{potential_coeffs, PotentialSpec};
use speclab_core::numlin::{eigenvalues, resolvent_norm};
use speclab_core::pseudo::field;
use speclab_core::toeplitz::fish_section;
use speclab_core::{ComplexPoint, GridSpec};

fn dense_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense");
    group.sample_size(10);
    for n in [50, 100, 200] {
        let m = fish_section(n).unwrap();
        group.bench_with_input(BenchmarkId::new("eigenvalues", n), &m, |b, m| {
            b.iter(|| eigenvalues(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("resolvent_norm", n), &m, |b, m| {
            b.iter(|| resolvent_norm(black_box(m), ComplexPoint::new(8.0, 2.0)).unwrap())
        });
    }
    group.finish();
}

fn field_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("field");
    group.sample_size(10);
    let m = fish_section(100).unwrap();
    for nodes in [21, 41] {
        let grid = GridSpec::new(-30.0, 32.0, -25.0, 25.0, nodes, nodes).unwrap();
        group.bench_with_input(BenchmarkId::new("fish_n100", nodes), &grid, |b, g| {
            b.iter(|| field(&m, black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("potential_coeffs");
    group.sample_size(10);
    let b = PotentialSpec::shipped();
    for n in [50, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, &n| {
            bch.iter(|| potential_coeffs(&b, black_box(n), 2 * n).unwrap())
        });
    }
    group.finish();
}

fn limit_estimates(c: &mut Criterion) {
    let spec = BlockSequenceSpec::example1(Example1Params::default());
    let grid = GridSpec::new(1.0, 3.0, -1.0, 1.0, 21, 21).unwrap();
    c.bench_function("essential_estimate_k2048", |b| {
        b.iter(|| essential_limit_estimate(&spec, black_box(&grid), 2048, 1e3).unwrap())
    });
}

criterion_group!(benches, dense_kernels, field_sweep, quadrature, limit_estimates);
criterion_main!(benches);
