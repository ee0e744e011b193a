use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plyap_bench::discrete_instance;
use plyap_core::problems::oracle_discrete;
use plyap_core::sampler::{expected_state, sample};

fn bench_expected_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("expected_state");
    for n in [2, 8, 32] {
        let (_, _, inst) = discrete_instance(n, 0.01);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |bench, inst| {
            bench.iter(|| expected_state(&inst.channel, &inst.rho0, &inst.schedule).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let (a, b, _) = discrete_instance(8, 0.01);
    c.bench_function("oracle_discrete/8", |bench| {
        bench.iter(|| oracle_discrete(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_sample(c: &mut Criterion) {
    let (_, _, inst) = discrete_instance(2, 0.01);
    let mut group = c.benchmark_group("sample");
    group.sample_size(20);
    for n_runs in [10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n_runs), &n_runs, |bench, &n_runs| {
            bench.iter(|| sample(&inst.channel, &inst.rho0, &inst.schedule, n_runs, 1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_expected_state, bench_oracle, bench_sample);
criterion_main!(benches);
