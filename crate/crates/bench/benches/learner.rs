//! Criterion benchmarks for the hot paths: forward marginalization, the
//! objective/gradient pass, and a full optimizer run.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stratal_core::datasets::builtin;
use stratal_core::grammar::{surface_distribution, WeightVector};
use stratal_core::objective::objective_and_gradient;
use stratal_core::optimizer::{minimize, OptimizerConfig};

fn sample_weights(strata: usize, constraints: usize) -> WeightVector {
    let flat = (0..strata * constraints)
        .map(|i| (i as f64 * 1.7) % 9.0)
        .collect();
    WeightVector::new(strata, constraints, flat).expect("shape matches")
}

fn bench_surface_distribution(c: &mut Criterion) {
    let dataset = builtin("en-opaque-mitre-cider-life-lie-for").unwrap();
    let weights = sample_weights(dataset.strata(), dataset.constraints().len());
    c.bench_function("surface_distribution/en-full", |b| {
        b.iter(|| {
            for graph in dataset.graphs() {
                black_box(surface_distribution(graph, black_box(&weights)).unwrap());
            }
        })
    });
}

fn bench_gradient(c: &mut Criterion) {
    let dataset = builtin("en-opaque-mitre-cider-life-lie-for").unwrap();
    let weights = sample_weights(dataset.strata(), dataset.constraints().len());
    let reg = dataset.regularization();
    c.bench_function("objective_and_gradient/en-full", |b| {
        b.iter(|| {
            black_box(
                objective_and_gradient(
                    dataset.graphs(),
                    dataset.observed(),
                    black_box(&weights),
                    &reg,
                )
                .unwrap(),
            )
        })
    });
}

fn bench_minimize(c: &mut Criterion) {
    let dataset = builtin("french-opaque").unwrap();
    let init = WeightVector::new(2, 3, vec![9.0, 0.5, 4.0, 2.0, 8.0, 1.0]).unwrap();
    let reg = dataset.regularization();
    let config = OptimizerConfig::default();
    c.bench_function("minimize/french", |b| {
        b.iter(|| black_box(minimize(&dataset, black_box(&init), &reg, &config).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_surface_distribution,
    bench_gradient,
    bench_minimize
);
criterion_main!(benches);
