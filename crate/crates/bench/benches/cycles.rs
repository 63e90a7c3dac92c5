use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use scf_bench::reference_instance;
use scf_core::{
    analysis, integrate_batch, orbit, IntegratorOptions, QuadratureOptions, ReactorState,
};

fn bench_cycle_growth(c: &mut Criterion) {
    let p = reference_instance();
    let q = QuadratureOptions::default();
    c.bench_function("cycle_growth r=0.4", |b| {
        b.iter(|| analysis::cycle_growth(black_box(&p), &q, black_box(0.4)).unwrap())
    });
}

fn bench_period(c: &mut Criterion) {
    let p = reference_instance();
    let q = QuadratureOptions::default();
    c.bench_function("period r=0.4", |b| {
        b.iter(|| orbit::period(black_box(&p), &q, black_box(0.4)).unwrap())
    });
    c.bench_function("period r=0.16 (near critical)", |b| {
        b.iter(|| orbit::period(black_box(&p), &q, black_box(0.16)).unwrap())
    });
}

fn bench_batch_cycle(c: &mut Criterion) {
    let p = reference_instance();
    let q = QuadratureOptions::default();
    let opts = IntegratorOptions::default();
    let orb = orbit::periodic_orbit(&p, &q, 0.4).unwrap();
    let start = ReactorState::new(0.0, orb.post_point.0, orb.post_point.1, orb.x_post);
    c.bench_function("integrate one orbit cycle", |b| {
        b.iter(|| integrate_batch(black_box(&p), &opts, black_box(start), 100.0).unwrap())
    });
}

fn bench_optimize(c: &mut Criterion) {
    let p = reference_instance();
    let q = QuadratureOptions::default();
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    group.bench_function("throughput grid 64 + golden section", |b| {
        b.iter(|| orbit::optimize_throughput(black_box(&p), &q, 64).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_cycle_growth,
    bench_period,
    bench_batch_cycle,
    bench_optimize
);
criterion_main!(benches);
