use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use commuprop::commutativity::{as_spatial_decomposition, check_with, martin_decompose_with, CheckOptions, DEFAULT_TOL};
use commuprop::generator::GeneratorSum;
use commuprop::linalg::C64;
use commuprop::par::Exec;
use commuprop::quantum::example1;
use commuprop::scalar::{parse, Interval};
use commuprop::solver::Propagator;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn generator() -> GeneratorSum {
    let f = |s: &str| parse(s).unwrap();
    example1(C64::new(1.0, 0.0), f("sin(t)"), f("t^2*cos(3*t)"), f("exp(-t)"), Interval::new(0.0, 2.0).unwrap())
        .unwrap()
        .generator
}

fn commutativity_grid(c: &mut Criterion) {
    let g = generator();
    let mut group = c.benchmark_group("check");
    for grid in [33, 129] {
        for (name, exec) in MODES {
            let opts = CheckOptions { exec, ..CheckOptions::with_grid(grid) };
            group.bench_with_input(BenchmarkId::new(name, grid), &opts, |b, opts| b.iter(|| check_with(&g, opts)));
        }
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let g = generator();
    let mut group = c.benchmark_group("martin_decompose");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 257), |b| {
            b.iter(|| martin_decompose_with(&g, 257, DEFAULT_TOL, exec).unwrap())
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let g = generator();
    let d = as_spatial_decomposition(&g).unwrap();
    let times = g.interval().grid(201);
    let short = g.interval().grid(17);
    let mut group = c.benchmark_group("trajectory");
    group.sample_size(20);
    for (name, exec) in MODES {
        // Fresh propagators each iteration so the per-time cache stays cold.
        group.bench_function(BenchmarkId::new(format!("zhu/{name}"), times.len()), |b| {
            b.iter(|| Propagator::zhu(d.clone()).trajectory_with(&times, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new(format!("rk4/{name}"), short.len()), |b| {
            b.iter(|| Propagator::rk4(g.clone(), 1000).trajectory_with(&short, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, commutativity_grid, decomposition, trajectories);
criterion_main!(benches);
