use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use perclap::laplacian::BoundaryCondition;
use perclap::rng::bernoulli_mask;
use perclap::spectral::{pool_ensemble, Ensemble};
use perclap::tails::cluster_size_decay_with;
use perclap::{Execution, LatticeBox};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn pooled_ids(c: &mut Criterion) {
    let mut group = c.benchmark_group("pool_ensemble");
    group.sample_size(10);
    let ens = Ensemble {
        lattice: LatticeBox::new(2, 24).unwrap(),
        p: 0.3,
        master_seed: 1,
        realizations: 64,
    };
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "d2_L24_R64"), &exec, |b, &exec| {
            b.iter(|| pool_ensemble(&ens, &BoundaryCondition::ALL, exec).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("bernoulli_mask");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "2e6"), &exec, |b, &exec| {
            b.iter(|| bernoulli_mask(7, 2_000_000, 0.3, exec))
        });
    }
    group.finish();
}

fn decay(c: &mut Criterion) {
    let mut group = c.benchmark_group("cluster_size_decay");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "d2_p0.3_1e4"), &exec, |b, &exec| {
            b.iter(|| cluster_size_decay_with(2, 0.3, 10_000, 3, 60, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pooled_ids, sampling, decay);
criterion_main!(benches);
