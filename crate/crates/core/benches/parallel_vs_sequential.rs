use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qwalk::dynamics::{trace_probability_with, QuantumState};
use qwalk::ensemble::{run_ensemble, EnsembleConfig, EnsembleTask, GraphSpec};
use qwalk::graph::erdos_renyi;
use qwalk::par::Execution;
use qwalk::search::{build_search_hamiltonian, GammaMode, SearchInstance};

fn strategies() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn time_grid(c: &mut Criterion) {
    let n = 400;
    let si = SearchInstance::new(erdos_renyi(n, 0.1, 42).unwrap(), 0, GammaMode::MeanFieldInvNp)
        .unwrap();
    let h = build_search_hamiltonian(&si).unwrap();
    h.spectrum().unwrap();
    let s = QuantumState::uniform(n).unwrap();
    let w = QuantumState::basis(n, 0).unwrap();
    let mut group = c.benchmark_group("time_grid");
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::new(name, 2000), |b| {
            b.iter(|| trace_probability_with(&h, &s, &w, 100.0, black_box(2000), exec).unwrap())
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let cfg = EnsembleConfig::new(
        GraphSpec::ErdosRenyi { n: 120, p: 0.2 },
        EnsembleTask::Search,
        8,
        42,
    );
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::new(name, cfg.size), |b| {
            b.iter(|| run_ensemble(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, time_grid, ensemble);
criterion_main!(benches);
