use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mcdopt::data::make_circles;
use mcdopt::hyperopt::{gp_fit, gp_predict};
use mcdopt::metrics::{ece, predictive_entropy, predictive_mean, roc_auc};
use mcdopt::nn::{loss_and_gradient, DropoutMask, LossSpec};
use mcdopt::{MlpConfig, MlpModel};

fn model(input_dim: usize) -> MlpModel {
    MlpModel::new(MlpConfig {
        input_dim,
        l1: 64,
        l2: 16,
        num_classes: 2,
        p1: 0.2,
        p2: 0.2,
        init_seed: 1,
    })
    .unwrap()
}

fn nn(c: &mut Criterion) {
    let ds = make_circles(256, 0.05, 0.8, 0).unwrap();
    let m = model(2);
    let batch = ds.features.select_rows(&(0..32).collect::<Vec<_>>());
    let labels = &ds.labels[..32];
    let masks: Vec<DropoutMask> = (0..4).map(|s| DropoutMask::sample(m.config(), s)).collect();

    c.bench_function("forward/batch32", |b| b.iter(|| m.forward(black_box(&batch), Some(&masks[0])).unwrap()));
    c.bench_function("mc_forward/n256_t50", |b| b.iter(|| m.mc_forward(black_box(&ds.features), 50, 3).unwrap()));
    c.bench_function("backward/ce_batch32", |b| {
        b.iter(|| loss_and_gradient(&m, black_box(&batch), labels, LossSpec::CrossEntropy, &masks[..1]).unwrap())
    });
    c.bench_function("backward/ua_m4_batch32", |b| {
        b.iter(|| {
            loss_and_gradient(&m, black_box(&batch), labels, LossSpec::UncertaintyAware { beta: 1.0 }, &masks).unwrap()
        })
    });
}

fn gp(c: &mut Criterion) {
    let xs: Vec<Vec<f64>> = (0..32)
        .map(|i| (0..4).map(|j| ((i * 7 + j * 3) % 11) as f64 / 10.0).collect())
        .collect();
    let ys: Vec<f64> = xs.iter().map(|x| x.iter().map(|v| (v - 0.4) * (v - 0.4)).sum()).collect();
    c.bench_function("gp_fit/n32_d4", |b| b.iter(|| gp_fit(black_box(&xs), &ys).unwrap()));
    let model = gp_fit(&xs, &ys).unwrap();
    c.bench_function("gp_predict/n32_d4", |b| b.iter(|| gp_predict(&model, black_box(&[0.3, 0.2, 0.7, 0.1]))));
}

fn metrics(c: &mut Criterion) {
    let ds = make_circles(1000, 0.05, 0.8, 2).unwrap();
    let m = model(2);
    let mc = m.mc_forward(&ds.features, 50, 1).unwrap();
    let mean = predictive_mean(&mc);
    let scores: Vec<f64> = (0..mean.rows()).map(|i| mean.get(i, 1)).collect();
    c.bench_function("metrics/predictive_entropy_n1000", |b| b.iter(|| predictive_entropy(black_box(&mean))));
    c.bench_function("metrics/ece_n1000", |b| b.iter(|| ece(black_box(&mean), &ds.labels, 10).unwrap()));
    c.bench_function("metrics/roc_auc_n1000", |b| b.iter(|| roc_auc(black_box(&scores), &ds.labels).unwrap()));
}

criterion_group!(benches, nn, gp, metrics);
criterion_main!(benches);
