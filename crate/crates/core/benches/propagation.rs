use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use donor_transport::experiments::{loaded_state, ExperimentId, ExperimentSpec};
use donor_transport::linalg::{expm, C64};
use donor_transport::liouville::{
    dissipator, generator, propagate, steady_state, time_average, Generator,
};
use donor_transport::spin::{build_hamiltonian, SystemConfig};
use ndarray::Array2;

fn setup(cfg: &SystemConfig) -> (Generator, donor_transport::liouville::DensityState) {
    let b = cfg.basis().unwrap();
    let g = generator(
        &build_hamiltonian(cfg, &b).unwrap(),
        &dissipator(cfg, &b).unwrap(),
    )
    .unwrap();
    let nn = b.nuclear_count();
    let mixed = Array2::from_diag_elem(nn, C64::new(1.0 / nn as f64, 0.0));
    (g, loaded_state(&b, &mixed).unwrap())
}

fn bench(c: &mut Criterion) {
    let pair = SystemConfig::default();
    let (g, rho0) = setup(&pair);
    c.bench_function("propagate 1x1 1us", |b| {
        b.iter(|| propagate(black_box(&g), &rho0, 1.0).unwrap())
    });
    c.bench_function("time_average 1x1 1us", |b| {
        b.iter(|| time_average(black_box(&g), &rho0, 1.0).unwrap())
    });
    c.bench_function("steady_state 1x1", |b| {
        b.iter(|| steady_state(black_box(&g)).unwrap())
    });
    c.bench_function("expm full 784", |b| {
        let m = g.matrix() * C64::new(0.01, 0.0);
        b.iter(|| expm(&black_box(&m).view()).unwrap())
    });

    let cluster = ExperimentSpec::defaults(ExperimentId::Cluster).config;
    let (gc, rc) = setup(&cluster);
    let mut group = c.benchmark_group("cluster");
    group.sample_size(10);
    group.bench_function("propagate 1x2 1us", |b| {
        b.iter(|| propagate(black_box(&gc), &rc, 1.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
