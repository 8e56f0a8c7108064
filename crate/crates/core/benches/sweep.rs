//! Sequential vs parallel execution of the two embarrassingly parallel loops:
//! the J₁ spectrum sweep and the quantum-trajectory ensemble.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fockedge::experiments::{linspace, pointer_run, spectrum_sweep, EvolveMode, PointerConfig, SshParams};
use fockedge::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn spectrum(c: &mut Criterion) {
    let p = SshParams { n_cells: 60, ..Default::default() };
    let j1 = linspace(0.0, -1.0, 24);
    let mut g = c.benchmark_group("spectrum_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| spectrum_sweep(black_box(&p), &j1, 0.0, exec).unwrap())
        });
    }
    g.finish();
}

fn trajectories(c: &mut Criterion) {
    let cfg = PointerConfig {
        mode: EvolveMode::Trajectories,
        n_traj: 64,
        n_cells: 15,
        t_final: 2.0,
        n_times: 11,
        rtol: 1e-8,
        ..Default::default()
    };
    let mut g = c.benchmark_group("trajectories");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| pointer_run(black_box(&cfg), 7, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spectrum, trajectories);
criterion_main!(benches);
