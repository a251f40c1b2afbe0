use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eprnet::{
    build_state_space, decompose, euclidean_gradient, optimize, squeezing_at_dc, NopaParams,
    OptimizerConfig, PassiveNetwork, PermutationVector,
};

fn spectra(c: &mut Criterion) {
    let params = NopaParams::reference();
    let lm = PassiveNetwork::local_optimum();
    c.bench_function("v0_at_optimum", |b| {
        b.iter(|| {
            let ss = build_state_space(black_box(&lm), &params).unwrap();
            squeezing_at_dc(&ss).unwrap()
        })
    });
    c.bench_function("gradient_at_optimum", |b| {
        b.iter(|| euclidean_gradient(black_box(&lm), &params).unwrap())
    });
}

fn synthesis(c: &mut Criterion) {
    let lm = PassiveNetwork::local_optimum();
    let perm = PermutationVector::default();
    c.bench_function("decompose_optimum", |b| {
        b.iter(|| decompose(black_box(&lm), &perm).unwrap())
    });
}

fn descent(c: &mut Criterion) {
    let params = NopaParams::reference();
    let cfb = PassiveNetwork::coherent_feedback();
    let cfg = OptimizerConfig::default();
    c.bench_function("optimize_from_cfb", |b| {
        b.iter(|| optimize(black_box(&cfb), &params, &cfg).unwrap())
    });
}

criterion_group!(benches, spectra, synthesis, descent);
criterion_main!(benches);
