use std::hint::black_box;

use arx_evolve::data::kse_like_series;
use arx_evolve::engine::{identify_bases, run, EngineConfig, Timing};
use arx_evolve::exec::Execution;
use arx_evolve::fitness::{AdaptationVariant, Evaluator};
use arx_evolve::genome::seed_population;
use arx_evolve::rng::seeded_rng;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn population_evaluation(c: &mut Criterion) {
    let table = kse_like_series(1);
    let cfg = EngineConfig::default();
    let bases = identify_bases(&cfg, &table).unwrap();
    let mut group = c.benchmark_group("evaluate_population");
    for size in [99, 990] {
        let pop = seed_population(&bases, size, 0.001, &mut seeded_rng(3)).unwrap();
        for (name, mode) in MODES {
            let eval = Evaluator::new(&table, 0, 1, mode).unwrap();
            group.bench_with_input(BenchmarkId::new(name, size), &pop, |b, pop| {
                b.iter(|| eval.evaluate(black_box(pop), AdaptationVariant::I).unwrap())
            });
        }
    }
    group.finish();
}

fn short_run(c: &mut Criterion) {
    let table = kse_like_series(1);
    let mut group = c.benchmark_group("run_50_generations");
    group.sample_size(10);
    for (name, mode) in MODES {
        let cfg = EngineConfig {
            generations: 50,
            timing: Timing::Disabled,
            execution: mode,
            ..EngineConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| run(black_box(&cfg), &table).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, population_evaluation, short_run);
criterion_main!(benches);
