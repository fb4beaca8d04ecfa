use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use irp_bench::{instance, outcomes, routing_problem};
use irp_core::benchgen::ScenarioKind;
use irp_core::vrp::{rtr_improve, savings_construct};
use irp_core::{evaluate, Archive, EvalSettings, FrequencyVector, RtrConfig, Search, SearchConfig, SolverKind};

fn routing(c: &mut Criterion) {
    let mut group = c.benchmark_group("routing");
    for stops in [20, 50, 100] {
        let p = routing_problem(stops, 60, 7);
        group.bench_with_input(BenchmarkId::new("savings", stops), &p, |b, p| {
            b.iter(|| savings_construct(black_box(p)).unwrap())
        });
        let start = savings_construct(&p).unwrap();
        group.bench_with_input(BenchmarkId::new("rtr", stops), &p, |b, p| {
            b.iter(|| rtr_improve(black_box(p), &start, 1, &RtrConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(20);
    let inst = instance(20, 60, ScenarioKind::Constant, 3);
    let freqs = FrequencyVector::uniform(inst.num_customers(), 2);
    for (name, settings) in [("savings", EvalSettings::savings()), ("rtr", EvalSettings::rtr(0))] {
        group.bench_function(name, |b| b.iter(|| evaluate(black_box(&inst), &freqs, &settings).unwrap()));
    }
    group.finish();
}

fn archive(c: &mut Criterion) {
    let points = outcomes(10_000, 5);
    c.bench_function("archive/insert_10k", |b| {
        b.iter_batched(
            Archive::<usize>::new,
            |mut arch| {
                for (k, o) in points.iter().enumerate() {
                    arch.insert(*o, k);
                }
                arch
            },
            BatchSize::SmallInput,
        )
    });
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    let inst = Arc::new(instance(10, 30, ScenarioKind::Constant, 4));
    for r in [3, 5, 11] {
        let cfg = SearchConfig { ref_point_count: r, solver: SolverKind::Savings, ..Default::default() };
        group.bench_with_input(BenchmarkId::new("savings_run", r), &cfg, |b, cfg| {
            b.iter(|| {
                let mut s = Search::new(inst.clone(), cfg.clone()).unwrap();
                s.run().unwrap();
                s.stats()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, routing, evaluation, archive, search);
criterion_main!(benches);
