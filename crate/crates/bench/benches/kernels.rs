use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use photoconv_bench::{small_network, synthetic_dataset};
use photoconv_core::optics::{coupling_matrix, ideal_dft, ParaxialPolicy, QuadratureSpec, SlabOptics, StarCouplerGeometry};
use photoconv_core::trainer::{train, TrainSpec};

fn optics(c: &mut Criterion) {
    let geometry =
        StarCouplerGeometry::dft(SlabOptics::default(), 340.9e-6, 21, 21, &ParaxialPolicy::default()).unwrap();
    let quad = QuadratureSpec::default();
    c.bench_function("coupling_matrix_21", |b| {
        b.iter(|| coupling_matrix(black_box(&geometry), &quad).unwrap())
    });
    c.bench_function("ideal_dft_784", |b| b.iter(|| ideal_dft(black_box(784), false).unwrap()));
}

fn training(c: &mut Criterion) {
    let data = synthetic_dataset(64, 784, 10);
    let net = small_network().unwrap();
    c.bench_function("forward_pcnn_112_16", |b| b.iter(|| net.output(black_box(data.sample(0))).unwrap()));
    c.bench_function("gradient_pcnn_112_16", |b| {
        b.iter(|| net.loss_and_gradients(black_box(data.sample(1)), 1).unwrap())
    });
    let spec = TrainSpec {
        epochs: 1,
        calibrate_output_scale: false,
        ..TrainSpec::default()
    };
    let mut group = c.benchmark_group("epoch");
    group.sample_size(10);
    group.bench_function("train_epoch_64_samples", |b| {
        b.iter(|| {
            let mut n = net.clone();
            train(&mut n, &data, &data, &spec).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, optics, training);
criterion_main!(benches);
