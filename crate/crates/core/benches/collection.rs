use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ioncollect::cavity::{gap_grid, length_sweep, CavityConfig};
use ioncollect::dipole::TransitionKind;
use ioncollect::mirror::{coupling, reflected_field, CollectionSystem, MirrorProfile, MirrorShape, Sampling};
use ioncollect::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sphere() -> CollectionSystem {
    let m = MirrorProfile::new(MirrorShape::Spherical { roc: 160e-6 }, 48f64.to_radians()).unwrap();
    CollectionSystem::new(m, 369.5e-9, 0.05).unwrap()
}

fn field(c: &mut Criterion) {
    let sys = sphere();
    let mut g = c.benchmark_group("reflected_field");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| reflected_field(TransitionKind::SigmaPlus, black_box(&sys), Sampling::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn fiber_coupling(c: &mut Criterion) {
    let sys = sphere();
    let mut g = c.benchmark_group("coupling");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| coupling(TransitionKind::Pi, black_box(&sys), true, Sampling::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn cavity_sweep(c: &mut Criterion) {
    let design = CavityConfig::reference().to_design().unwrap();
    let grid = gap_grid(0.01e-6, 1.5e-6, 2001).unwrap();
    let mut g = c.benchmark_group("length_sweep");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| length_sweep(black_box(&design), &grid, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, field, fiber_coupling, cavity_sweep);
criterion_main!(benches);
