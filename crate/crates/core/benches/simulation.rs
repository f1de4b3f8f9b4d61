use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qgen::exec::Execution;
use qgen::gates::{controlled_rot, ry};
use qgen::gradients::{grad_vector_with, DiagonalObservable};
use qgen::qgan::{discriminator_outputs_with, DiscriminatorSpec};
use qgen::{InputKind, LayeredAnsatz, StateVector};

const PATHS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn gate_application(c: &mut Criterion) {
    let mut group = c.benchmark_group("gates");
    for n in [16usize, 20] {
        let g1 = ry(0.37).unwrap();
        let g2 = controlled_rot(0.5, -0.2).unwrap();
        for (name, exec) in PATHS {
            let mut s = StateVector::plus(n).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("layer/{name}"), n), &n, |b, &n| {
                b.iter(|| {
                    for q in 0..n {
                        s.apply_1q_with(exec, &g1, q).unwrap();
                    }
                    for q in 0..n - 1 {
                        s.apply_2q_with(exec, &g2, q, q + 1).unwrap();
                    }
                    black_box(s.amplitudes()[0])
                })
            });
        }
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("grad_vector");
    group.sample_size(10);
    for (n, layers) in [(4usize, 3usize), (8, 4)] {
        let a = LayeredAnsatz::new(n, layers, InputKind::Zero).unwrap();
        let p = a.random_params(1.0, 1).unwrap();
        let obs = DiagonalObservable::new(n, (0..1 << n).map(|i| i as f64).collect()).unwrap();
        for (name, exec) in PATHS {
            group.bench_function(BenchmarkId::new(name, format!("{n}x{layers}")), |b| {
                b.iter(|| grad_vector_with(exec, &a, black_box(&p), &obs).unwrap())
            });
        }
    }
    group.finish();
}

fn discriminator(c: &mut Criterion) {
    let mut group = c.benchmark_group("discriminator_outputs");
    let disc = DiscriminatorSpec::new(6, 2, 3).unwrap();
    let p = disc.ansatz.random_params(1.0, 2).unwrap();
    for (name, exec) in PATHS {
        group.bench_function(name, |b| {
            b.iter(|| discriminator_outputs_with(exec, &disc, black_box(&p)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gate_application, gradients, discriminator);
criterion_main!(benches);
