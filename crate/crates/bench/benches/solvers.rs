use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rmt_clt::{
    fluctuation_report, mutual_info, sample_sigma, solve_fundamental, specular, EntryDistribution, EntryKind,
    ModelSpec, SolverOptions,
};

fn rician(n: usize) -> ModelSpec {
    let d = (0..n).map(|i| 0.5 + i as f64 / n as f64).collect();
    ModelSpec::new(
        d,
        vec![1.0; n],
        specular::rank_one_phased(n, n, 1.0),
        EntryDistribution::new(EntryKind::Qpsk).unwrap(),
    )
    .unwrap()
}

fn equilibrium(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_fundamental");
    for n in [16, 64, 128] {
        let spec = rician(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| solve_fundamental(black_box(spec), 1.0, &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn report(c: &mut Criterion) {
    let mut group = c.benchmark_group("fluctuation_report");
    for n in [16, 64] {
        let spec = rician(n);
        let sol = solve_fundamental(&spec, 1.0, &SolverOptions::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(spec, sol), |b, (spec, sol)| {
            b.iter(|| fluctuation_report(black_box(spec), black_box(sol)).unwrap())
        });
    }
    group.finish();
}

fn mutual_information(c: &mut Criterion) {
    let mut group = c.benchmark_group("mutual_info");
    for n in [64, 256] {
        let sigma = sample_sigma(&rician(n), 1, 0).sigma;
        group.bench_with_input(BenchmarkId::from_parameter(n), &sigma, |b, sigma| {
            b.iter(|| mutual_info(black_box(sigma), 1.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, equilibrium, report, mutual_information);
criterion_main!(benches);
