use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::objective::Objective;
use super::space::{decode, Candidate, SearchSpace};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{accuracy, classify, ece, predictive_entropy, predictive_mean, uacc, uncertainty_confusion};
use crate::nn::{train, uncertainty_aware_loss, LossKind, MlpModel, TrainConfig};
use crate::rng::{derive_seed, stream};

/// Fitness assigned to candidates whose training diverged.
pub const DIVERGENCE_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Training settings for each candidate; the loss is forced to the
    /// uncertainty-aware loss and the seed is overridden.
    pub train: TrainConfig,
    pub eval_mc_passes: usize,
    pub uacc_threshold: f64,
    pub ece_bins: usize,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig {
            train: TrainConfig {
                epochs: 40,
                loss_kind: LossKind::UncertaintyAware,
                train_mc_passes: 2,
                ..TrainConfig::default()
            },
            eval_mc_passes: 20,
            uacc_threshold: 0.5,
            ece_bins: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationMetrics {
    pub accuracy: f64,
    pub uacc: f64,
    pub ece: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub candidate: Candidate,
    pub fitness: f64,
    /// `None` when training diverged.
    pub metrics: Option<ValidationMetrics>,
    pub diverged: bool,
}

/// Train a fresh model for `candidate` on `fit` and score it on `valid` with
/// the uncertainty-aware loss.
pub fn evaluate_fitness(
    candidate: &Candidate,
    fit: &Dataset,
    valid: &Dataset,
    cfg: &FitnessConfig,
    seed: u64,
) -> Result<FitnessRecord> {
    if fit.is_empty() || valid.is_empty() {
        return Err(Error::arg("fitness splits must be nonempty"));
    }
    if cfg.eval_mc_passes == 0 {
        return Err(Error::arg("eval_mc_passes must be at least 1"));
    }
    let mcfg = candidate.decoded.to_config(
        fit.dim(),
        fit.num_classes,
        derive_seed(seed, &[stream::FITNESS, stream::INIT]),
    );
    let tcfg = TrainConfig {
        loss_kind: LossKind::UncertaintyAware,
        seed: derive_seed(seed, &[stream::FITNESS, stream::SHUFFLE]),
        ..cfg.train
    };
    let model = MlpModel::new(mcfg)?;
    let diverged = |candidate: &Candidate| FitnessRecord {
        candidate: candidate.clone(),
        fitness: DIVERGENCE_PENALTY,
        metrics: None,
        diverged: true,
    };
    let trained = match train(&model, fit, None, &tcfg) {
        Ok((m, _)) => m,
        Err(Error::Diverged { .. }) => return Ok(diverged(candidate)),
        Err(e) => return Err(e),
    };
    let mc = trained.mc_forward(
        &valid.features,
        cfg.eval_mc_passes,
        derive_seed(seed, &[stream::FITNESS, stream::EVAL_MASK]),
    )?;
    let loss = uncertainty_aware_loss(&mc, &valid.labels, tcfg.pe_penalty_weight)?;
    if !loss.is_finite() {
        return Ok(diverged(candidate));
    }
    let mean = predictive_mean(&mc);
    let pe = predictive_entropy(&mean);
    let predicted = classify(&mean);
    let ucm = uncertainty_confusion(&pe, &predicted, &valid.labels, cfg.uacc_threshold)?;
    Ok(FitnessRecord {
        candidate: candidate.clone(),
        fitness: loss,
        metrics: Some(ValidationMetrics {
            accuracy: accuracy(&predicted, &valid.labels)?,
            uacc: uacc(&ucm)?,
            ece: ece(&mean, &valid.labels, cfg.ece_bins)?,
        }),
        diverged: false,
    })
}

/// Objective over an `(l1, l2, p1, p2)` space backed by [`evaluate_fitness`].
///
/// It only holds the fit and validation folds, so a search driven through it
/// cannot observe held-out test data. Every candidate is trained with the
/// same seed, which makes fitness a function of the decoded configuration
/// alone; repeated configurations are served from a cache.
pub struct FitnessObjective<'a> {
    space: &'a SearchSpace,
    fit: &'a Dataset,
    valid: &'a Dataset,
    cfg: FitnessConfig,
    seed: u64,
    cache: HashMap<(usize, usize, u64, u64), usize>,
    records: Vec<FitnessRecord>,
    calls: usize,
    error: Option<Error>,
}

impl<'a> FitnessObjective<'a> {
    pub fn new(space: &'a SearchSpace, fit: &'a Dataset, valid: &'a Dataset, cfg: FitnessConfig, seed: u64) -> Self {
        FitnessObjective {
            space,
            fit,
            valid,
            cfg,
            seed,
            cache: HashMap::new(),
            records: Vec::new(),
            calls: 0,
            error: None,
        }
    }

    /// Distinct configurations evaluated, in first-seen order.
    pub fn records(&self) -> &[FitnessRecord] {
        &self.records
    }

    /// Total objective calls, including cache hits.
    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn best(&self) -> Option<&FitnessRecord> {
        self.records.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness))
    }

    /// First hard error raised during evaluation, if any.
    pub fn take_error(&mut self) -> Option<Error> {
        self.error.take()
    }

    /// Evaluate `lambda`, reusing a cached record when the decoded
    /// configuration has been seen.
    pub fn record_for(&mut self, lambda: &[f64]) -> Result<&FitnessRecord> {
        self.calls += 1;
        let decoded = decode(lambda, self.space)?;
        let key = decoded.key();
        if let Some(&i) = self.cache.get(&key) {
            return Ok(&self.records[i]);
        }
        let candidate = Candidate {
            lambda: lambda.to_vec(),
            decoded,
        };
        let rec = evaluate_fitness(&candidate, self.fit, self.valid, &self.cfg, self.seed)?;
        self.cache.insert(key, self.records.len());
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }
}

impl Objective for FitnessObjective<'_> {
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        if self.error.is_some() {
            return f64::INFINITY;
        }
        match self.record_for(x) {
            Ok(r) => r.fitness,
            Err(e) => {
                self.error = Some(e);
                f64::INFINITY
            }
        }
    }
}
