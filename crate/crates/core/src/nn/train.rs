use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::backprop::{loss_and_gradient, loss_value};
use super::loss::{LossKind, LossSpec};
use super::model::{DropoutMask, MlpModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_at, stream};

/// Mini-batch SGD settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub loss_kind: LossKind,
    /// Dropout passes per mini-batch for the uncertainty-aware loss.
    pub train_mc_passes: usize,
    /// Weight of the entropy penalty; 1 averages it over passes.
    pub pe_penalty_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            batch_size: 32,
            learning_rate: 0.05,
            loss_kind: LossKind::StandardCe,
            train_mc_passes: 4,
            pe_penalty_weight: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::arg("batch_size must be at least 1"));
        }
        if self.train_mc_passes == 0 {
            return Err(Error::arg("train_mc_passes must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::arg("learning_rate must be positive"));
        }
        if !(self.pe_penalty_weight >= 0.0 && self.pe_penalty_weight.is_finite()) {
            return Err(Error::arg("pe_penalty_weight must be nonnegative"));
        }
        Ok(())
    }

    pub fn loss_spec(&self) -> LossSpec {
        match self.loss_kind {
            LossKind::StandardCe => LossSpec::CrossEntropy,
            LossKind::UncertaintyAware => LossSpec::UncertaintyAware {
                beta: self.pe_penalty_weight,
            },
        }
    }

    /// Passes sampled per mini-batch step.
    pub fn passes_per_step(&self) -> usize {
        match self.loss_kind {
            LossKind::StandardCe => 1,
            LossKind::UncertaintyAware => self.train_mc_passes,
        }
    }
}

/// Per-epoch mean losses. `valid_loss` is empty when no validation set was
/// supplied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<f64>,
}

/// Trains a copy of `model`. Shuffling and dropout masks are derived from
/// `cfg.seed`, so the result depends only on the inputs.
pub fn train(
    model: &MlpModel,
    train_set: &Dataset,
    valid_set: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    cfg.validate()?;
    let mcfg = *model.config();
    for ds in std::iter::once(train_set).chain(valid_set) {
        if ds.is_empty() {
            return Err(Error::arg("training and validation sets must be nonempty"));
        }
        if ds.features.cols() != mcfg.input_dim {
            return Err(Error::shape(format!(
                "dataset has {} features, model expects {}",
                ds.features.cols(),
                mcfg.input_dim
            )));
        }
    }

    let mut model = model.clone();
    let mut history = TrainHistory::default();
    let spec = cfg.loss_spec();
    let passes = cfg.passes_per_step();
    let n = train_set.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut labels_buf = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        let mut rng = rng_at(cfg.seed, &[stream::SHUFFLE, epoch as u64]);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut weighted = 0.0;
        for (step, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let xb = train_set.features.select_rows(chunk);
            labels_buf.clear();
            labels_buf.extend(chunk.iter().map(|&i| train_set.labels[i]));
            let masks: Vec<_> = (0..passes)
                .map(|m| {
                    let s = derive_seed(cfg.seed, &[stream::TRAIN_MASK, epoch as u64, step as u64, m as u64]);
                    DropoutMask::sample(&mcfg, s)
                })
                .collect();
            let (loss, grads) = loss_and_gradient(&model, &xb, &labels_buf, spec, &masks)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            weighted += loss * chunk.len() as f64;
            model.params.axpy(-cfg.learning_rate, &grads);
        }
        if !model.params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.train_loss.push(weighted / n as f64);

        if let Some(valid) = valid_set {
            let masks: Vec<_> = match cfg.loss_kind {
                LossKind::StandardCe => vec![DropoutMask::identity(&mcfg)],
                LossKind::UncertaintyAware => (0..passes)
                    .map(|m| {
                        let s = derive_seed(cfg.seed, &[stream::VALID_MASK, epoch as u64, m as u64]);
                        DropoutMask::sample(&mcfg, s)
                    })
                    .collect(),
            };
            let v = loss_value(&model, &valid.features, &valid.labels, spec, &masks)?;
            if !v.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            history.valid_loss.push(v);
        }
    }
    Ok((model, history))
}
