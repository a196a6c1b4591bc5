use mcdopt::data::make_circles;
use mcdopt::metrics::{accuracy, classify, predictive_mean};
use mcdopt::nn::*;
use mcdopt::{Dataset, McPrediction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(d: usize, l1: usize, l2: usize, c: usize, p: f64, seed: u64) -> MlpConfig {
    MlpConfig {
        input_dim: d,
        l1,
        l2,
        num_classes: c,
        p1: p,
        p2: p,
        init_seed: seed,
    }
}

fn random_batch(rng: &mut ChaCha8Rng, b: usize, d: usize) -> Matrix {
    Matrix::from_vec(b, d, (0..b * d).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

#[test]
fn gradients_match_central_differences() {
    let mut worst: f64 = 0.0;
    for s in 0..24u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let d = rng.random_range(1..=4);
        let cfg = config(d, rng.random_range(2..=6), rng.random_range(2..=5), 2, 0.3, s);
        let mut model = MlpModel::new(cfg).unwrap();
        // Nonzero biases keep pre-activations off the ReLU kink at exactly zero.
        for block in [1, 3, 5] {
            for v in model.params.blocks_mut()[block].iter_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
        let b = rng.random_range(1..=5);
        let x = random_batch(&mut rng, b, d);
        let y: Vec<usize> = (0..b).map(|_| rng.random_range(0..2)).collect();
        let masks: Vec<DropoutMask> = (0..3).map(|m| DropoutMask::sample(&cfg, s * 10 + m)).collect();
        for (loss, ms) in [
            (LossSpec::CrossEntropy, &masks[..1]),
            (LossSpec::UncertaintyAware { beta: 1.0 }, &masks[..]),
        ] {
            let analytic = backward(&model, &x, &y, loss, ms).unwrap();
            let numeric = numeric_gradient(&model, &x, &y, loss, ms, 1e-5).unwrap();
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "seed {s} {loss:?}: relative error {err}");
            worst = worst.max(err);
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn dropout_is_unbiased_in_expectation() {
    // A single hidden layer in isolation: E[mask_j] = 1 for inverted dropout.
    let cfg = config(1, 8, 4, 2, 0.3, 0);
    let n = 10_000;
    let mut sums = [0.0; 8];
    let mut sq = [0.0; 8];
    for s in 0..n as u64 {
        let m = DropoutMask::sample(&cfg, s);
        for j in 0..8 {
            sums[j] += m.mask1[j];
            sq[j] += m.mask1[j] * m.mask1[j];
        }
    }
    for j in 0..8 {
        let mean = sums[j] / n as f64;
        let var = sq[j] / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "unit {j}: mean {mean}, se {se}");
    }
}

fn blobs(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = i % 2;
        let c = if y == 0 { -2.0 } else { 2.0 };
        data.push(c + rng.random_range(-0.5..0.5));
        data.push(c + rng.random_range(-0.5..0.5));
        labels.push(y);
    }
    Dataset::new(Matrix::from_vec(n, 2, data).unwrap(), labels, 2, "blobs").unwrap()
}

#[test]
fn separable_blobs_are_learned() {
    let ds = blobs(200, 1);
    for kind in [LossKind::StandardCe, LossKind::UncertaintyAware] {
        let model = MlpModel::new(config(2, 16, 8, 2, 0.1, 3)).unwrap();
        let tc = TrainConfig {
            epochs: 30,
            loss_kind: kind,
            seed: 5,
            ..Default::default()
        };
        let (m, hist) = train(&model, &ds, Some(&ds), &tc).unwrap();
        assert_eq!(hist.train_loss.len(), 30);
        assert_eq!(hist.valid_loss.len(), 30);
        let mc = m.mc_forward(&ds.features, 20, 9).unwrap();
        let acc = accuracy(&classify(&predictive_mean(&mc)), &ds.labels).unwrap();
        assert_eq!(acc, 1.0, "{kind:?}");
    }
}

#[test]
fn zero_epochs_leaves_model_unchanged() {
    let ds = blobs(20, 0);
    let model = MlpModel::new(config(2, 4, 3, 2, 0.2, 1)).unwrap();
    let tc = TrainConfig {
        epochs: 0,
        ..Default::default()
    };
    let (m, hist) = train(&model, &ds, None, &tc).unwrap();
    assert_eq!(m.params, model.params);
    assert!(hist.train_loss.is_empty());
}

#[test]
fn training_is_deterministic() {
    let ds = make_circles(100, 0.05, 0.5, 2).unwrap();
    let model = MlpModel::new(config(2, 8, 4, 2, 0.2, 1)).unwrap();
    let tc = TrainConfig {
        epochs: 5,
        loss_kind: LossKind::UncertaintyAware,
        seed: 11,
        ..Default::default()
    };
    let a = train(&model, &ds, None, &tc).unwrap();
    let b = train(&model, &ds, None, &tc).unwrap();
    assert_eq!(a.0.params, b.0.params);
    assert_eq!(a.1, b.1);
    let other = TrainConfig { seed: 12, ..tc };
    assert_ne!(train(&model, &ds, None, &other).unwrap().0.params, a.0.params);
}

#[test]
fn training_rejects_bad_inputs() {
    let ds = blobs(10, 0);
    let empty = ds.subset(&[]);
    let model = MlpModel::new(config(2, 4, 3, 2, 0.2, 1)).unwrap();
    assert!(train(&model, &empty, None, &TrainConfig::default()).is_err());
    let wrong = MlpModel::new(config(3, 4, 3, 2, 0.2, 1)).unwrap();
    assert!(train(&wrong, &ds, None, &TrainConfig::default()).is_err());
    let tc = TrainConfig {
        batch_size: 0,
        ..Default::default()
    };
    assert!(train(&model, &ds, None, &tc).is_err());
}

#[test]
fn overflowing_model_reports_divergence() {
    let ds = blobs(40, 0);
    let cfg = config(2, 8, 4, 2, 0.0, 1);
    let mut model = MlpModel::new(cfg).unwrap();
    for block in [0, 2, 4] {
        for v in model.params.blocks_mut()[block].iter_mut() {
            *v = 1e200;
        }
    }
    match train(&model, &ds, None, &TrainConfig::default()) {
        Err(mcdopt::Error::Diverged { epoch: 0 }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|_| ())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passes_stay_on_simplex(
        seed in any::<u64>(),
        d in 1usize..5,
        c in 2usize..5,
        b in 1usize..8,
        t in 1usize..6,
        p in 0.0f64..0.9,
    ) {
        let model = MlpModel::new(config(d, 5, 4, c, p, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_batch(&mut rng, b, d);
        let mc = model.mc_forward(&x, t, seed ^ 1).unwrap();
        prop_assert_eq!(mc.dims(), (t, b, c));
        for pass in 0..t {
            for row in mc.pass(pass).chunks(c) {
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        // Same seed, same passes.
        let again = model.mc_forward(&x, t, seed ^ 1).unwrap();
        prop_assert_eq!(mc.as_slice(), again.as_slice());
    }

    #[test]
    fn ua_without_penalty_is_bce_of_mean(
        raw in prop::collection::vec(0.001f64..0.999, 2..24),
        m in 1usize..4,
        seed in any::<u64>(),
    ) {
        let b = raw.len() / m;
        prop_assume!(b >= 1);
        let mut probs = Vec::new();
        for &q in &raw[..m * b] {
            probs.push(1.0 - q);
            probs.push(q);
        }
        let mc = McPrediction::new(m, b, 2, probs).unwrap();
        let labels: Vec<usize> = (0..b).map(|i| ((seed >> (i % 64)) & 1) as usize).collect();
        let mut bce = 0.0;
        for (i, &y) in labels.iter().enumerate() {
            let mu: f64 = (0..m).map(|t| raw[t * b + i]).sum::<f64>() / m as f64;
            bce -= if y == 1 { mu.ln() } else { (1.0 - mu).ln() };
        }
        let got = uncertainty_aware_loss(&mc, &labels, 0.0).unwrap();
        prop_assert!((got - bce / b as f64).abs() < 1e-12);
    }
}
