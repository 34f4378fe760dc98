use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fragsim::chain::{make_model, BathSide, ModelParams};
use fragsim::dynamics::{Mode, Observable, Schedule, SimulationConfig, Simulator};
use fragsim::krylov::{build_krylov_graph_with, enumerate_sectors, EdgeConvention};
use fragsim::spectral::{min_conductance_with, Strategy};
use fragsim::Executor;

const EXECUTORS: [(&str, Executor); 2] = [("sequential", Executor::Sequential), ("parallel", Executor::Parallel)];

fn trajectories(c: &mut Criterion) {
    let m = make_model("tjz", 16, &ModelParams::default())
        .unwrap()
        .with_bath_side(BathSide::Both)
        .unwrap();
    let init = m.parse_config(&"u".repeat(16)).unwrap();
    let config = SimulationConfig {
        mode: Mode::Local { sweeps: 1 },
        steps: 200,
        trajectories: 512,
        seed: 1,
        observables: vec![Observable::Magnetization],
        schedule: Schedule::Log(10),
    };
    let sim = Simulator::new(&m, config, None, None).unwrap();
    let mut group = c.benchmark_group("trajectories");
    group.sample_size(10);
    for (name, exec) in EXECUTORS {
        group.bench_function(BenchmarkId::new("tjz-16", name), |b| {
            b.iter(|| sim.run(&init, exec).unwrap())
        });
    }
    group.finish();
}

fn graph_build(c: &mut Criterion) {
    let m = make_model("breakdown", 11, &ModelParams::default()).unwrap();
    let d = enumerate_sectors(&m).unwrap();
    let mut group = c.benchmark_group("krylov-graph");
    group.sample_size(10);
    for (name, exec) in EXECUTORS {
        group.bench_function(BenchmarkId::new("breakdown-11", name), |b| {
            b.iter(|| build_krylov_graph_with(&d, m.bath(), exec).unwrap())
        });
    }
    group.finish();
}

fn exhaustive_cuts(c: &mut Criterion) {
    let m = make_model("pairflip", 3, &ModelParams { q: Some(3), r: None }).unwrap();
    let d = enumerate_sectors(&m).unwrap();
    let g = build_krylov_graph_with(&d, m.bath(), Executor::Sequential).unwrap();
    let mut group = c.benchmark_group("exhaustive-cut");
    group.sample_size(10);
    for (name, exec) in EXECUTORS {
        group.bench_function(BenchmarkId::new("pairflip3-3", name), |b| {
            b.iter(|| min_conductance_with(&g, Strategy::Exhaustive, EdgeConvention::Probabilistic, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories, graph_build, exhaustive_cuts);
criterion_main!(benches);
