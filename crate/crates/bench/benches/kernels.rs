use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fredholm_bench::fixture;
use fredholm_core::param::adaptive_alpha_with;
use fredholm_core::spectral::{quadrature_operator_matrix, spectrum};
use fredholm_core::{operator_matrix, AdaptiveOptions, Kernel};
use std::hint::black_box;

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_matrix");
    for n in [1000, 10000] {
        let f = fixture(Kernel::green(), n);
        let p = &f.problem;
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| operator_matrix(&p.kernel, &p.space, black_box(&f.design), &p.quad).unwrap())
        });
    }
    group.finish();
}

fn solves(c: &mut Criterion) {
    let f = fixture(Kernel::green(), 9000);
    let disc = f.discretization();
    c.bench_function("solve/fixed_alpha", |b| {
        b.iter(|| disc.solve(black_box(&f.observations), 1e-10).unwrap())
    });
    let opts = AdaptiveOptions::defaults(disc.n(), 2).unwrap();
    c.bench_function("solve/adaptive", |b| {
        b.iter(|| adaptive_alpha_with(&disc, black_box(&f.observations), &opts).unwrap())
    });
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    for n in [200, 400] {
        let a = quadrature_operator_matrix(&Kernel::exponential(), n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| spectrum(black_box(a)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, solves, spectra);
criterion_main!(benches);
