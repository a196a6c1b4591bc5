use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{MethodReport, SeedRecord};
use super::{ExperimentConfig, Method};
use crate::data::{pca_fit, pca_transform, split_indices, standardize_apply, standardize_fit, Dataset, SplitSpec};
use crate::error::{Error, Result, StageContext};
use crate::hyperopt::{
    decode, run_optimizer, FitnessObjective, FitnessRecord, Hyperparams, OptimizerKind, SearchResult,
};
use crate::metrics::{
    accuracy, classify, ece, group_centers, predictive_entropy, predictive_mean, roc_auc, uacc, uncertainty_confusion,
};
use crate::nn::{train, MlpModel, TrainConfig};
use crate::rng::{derive_seed, stream};

/// Every seed and setting one (method, seed) run uses, in one diffable value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub method: Method,
    pub seed: u64,
    pub split_seed: u64,
    pub fold_seed: u64,
    pub search_seed: u64,
    pub fitness_seed: u64,
    pub init_seed: u64,
    pub eval_seed: u64,
    pub optimizer: Option<OptimizerKind>,
    /// Fixed architecture; `None` when it comes from the search.
    pub hyperparams: Option<Hyperparams>,
    pub train: TrainConfig,
}

pub fn plan(cfg: &ExperimentConfig, method: Method, seed: u64) -> RunPlan {
    let optimizer = method.optimizer();
    RunPlan {
        method,
        seed,
        split_seed: derive_seed(seed, &[stream::SPLIT]),
        fold_seed: derive_seed(seed, &[stream::FOLD]),
        search_seed: derive_seed(seed, &[stream::SEARCH]),
        fitness_seed: derive_seed(seed, &[stream::FITNESS]),
        init_seed: derive_seed(seed, &[stream::FINAL, stream::INIT]),
        eval_seed: derive_seed(seed, &[stream::FINAL, stream::EVAL_MASK]),
        optimizer,
        hyperparams: optimizer.is_none().then_some(cfg.baseline),
        train: TrainConfig {
            loss_kind: method.loss_kind(),
            seed: derive_seed(seed, &[stream::FINAL, stream::SHUFFLE]),
            ..cfg.train
        },
    }
}

/// Preprocessed train/test splits for one seed. Standardization and PCA are
/// fitted on the training rows only.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    /// Test rows as indices into the built dataset.
    pub test_indices: Vec<usize>,
}

pub fn prepare(cfg: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    let ds = cfg.dataset.build(seed).stage("dataset")?;
    let spec = SplitSpec::stratified(cfg.test_fraction, derive_seed(seed, &[stream::SPLIT]));
    let idx = split_indices(&ds.labels, ds.num_classes, &spec).stage("split")?;
    let (train, test) = (ds.subset(&idx.train), ds.subset(&idx.test));
    let stats = standardize_fit(&train).stage("standardize")?;
    let mut train = standardize_apply(&train, &stats).stage("standardize")?;
    let mut test = standardize_apply(&test, &stats).stage("standardize")?;
    if let Some(k) = cfg.pca_components {
        let pca = pca_fit(&train, k).stage("pca")?;
        train = pca_transform(&train, &pca).stage("pca")?;
        test = pca_transform(&test, &pca).stage("pca")?;
    }
    Ok(Prepared {
        train,
        test,
        test_indices: idx.test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub optimizer: OptimizerKind,
    pub result: SearchResult,
    pub best: FitnessRecord,
    /// Distinct configurations trained.
    pub distinct_evaluations: usize,
}

/// Hyperparameter search on the training split alone: it is re-split into a
/// fit and a validation fold and never sees test rows.
pub fn search_hyperparams(
    train_split: &Dataset,
    cfg: &ExperimentConfig,
    kind: OptimizerKind,
    seed: u64,
) -> Result<SearchOutcome> {
    let spec = SplitSpec::stratified(cfg.fold_fraction, derive_seed(seed, &[stream::FOLD]));
    let idx = split_indices(&train_split.labels, train_split.num_classes, &spec).stage("fold split")?;
    let fit = train_split.subset(&idx.train);
    let valid = train_split.subset(&idx.test);
    let mut fitness = cfg.fitness;
    fitness.train.pe_penalty_weight = cfg.train.pe_penalty_weight;
    let mut obj = FitnessObjective::new(
        &cfg.search_space,
        &fit,
        &valid,
        fitness,
        derive_seed(seed, &[stream::FITNESS]),
    );
    let result = run_optimizer(
        kind,
        &mut obj,
        &cfg.search_space,
        &cfg.optimizer,
        derive_seed(seed, &[stream::SEARCH]),
    )
    .stage("search")?;
    if let Some(e) = obj.take_error() {
        return Err(e).stage("fitness");
    }
    let best = obj.record_for(&result.best_x).stage("fitness")?.clone();
    Ok(SearchOutcome {
        optimizer: kind,
        distinct_evaluations: obj.records().len(),
        result,
        best,
    })
}

/// Test-set outputs kept for curves and histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutputs {
    pub pe: Vec<f64>,
    pub predicted: Vec<usize>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub record: SeedRecord,
    pub outputs: TestOutputs,
    pub test_indices: Vec<usize>,
    pub search: Option<SearchOutcome>,
}

/// Run `cfg.method` for one seed.
pub fn run_method(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    cfg.validate()?;
    let prepared = prepare(cfg, seed)?;
    run_prepared(&prepared, cfg, cfg.method, seed)
}

pub fn run_prepared(prepared: &Prepared, cfg: &ExperimentConfig, method: Method, seed: u64) -> Result<SeedRun> {
    let p = plan(cfg, method, seed);
    let (hyper, search) = match p.optimizer {
        Some(kind) => {
            let outcome = search_hyperparams(&prepared.train, cfg, kind, seed)?;
            let h = decode(&outcome.best.candidate.lambda, &cfg.search_space)?;
            (h, Some(outcome))
        }
        None => (cfg.baseline, None),
    };
    let train_set = &prepared.train;
    let test = &prepared.test;
    let mcfg = hyper.to_config(train_set.dim(), train_set.num_classes, p.init_seed);
    let model = MlpModel::new(mcfg).stage("model")?;
    let (model, _) = train(&model, train_set, None, &p.train).stage("train")?;
    let mc = model
        .mc_forward(&test.features, cfg.eval_mc_passes, p.eval_seed)
        .stage("evaluate")?;
    let mean = predictive_mean(&mc);
    let pe = predictive_entropy(&mean);
    let predicted = classify(&mean);
    let labels = test.labels.clone();
    let ucm = uncertainty_confusion(&pe, &predicted, &labels, cfg.uacc_threshold).stage("metrics")?;
    let auc = if test.num_classes == 2 {
        let scores: Vec<f64> = (0..mean.rows()).map(|i| mean.get(i, 1)).collect();
        match roc_auc(&scores, &labels) {
            Ok(a) => Some(a),
            Err(Error::UndefinedAuc) => None,
            Err(e) => return Err(e).stage("metrics"),
        }
    } else {
        None
    };
    let centers = group_centers(&pe, &predicted, &labels).stage("metrics")?;
    let record = SeedRecord {
        seed,
        accuracy: accuracy(&predicted, &labels).stage("metrics")?,
        auc,
        uacc: uacc(&ucm).stage("metrics")?,
        ece: ece(&mean, &labels, cfg.ece_bins).stage("metrics")?,
        mu1: centers.mu_incorrect,
        mu2: centers.mu_correct,
        dist: centers.distance,
        hyperparams: hyper,
    };
    Ok(SeedRun {
        record,
        outputs: TestOutputs { pe, predicted, labels },
        test_indices: prepared.test_indices.clone(),
        search,
    })
}

/// All runs of a comparison, keyed by method, each in seed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Comparison {
    pub runs: BTreeMap<Method, Vec<SeedRun>>,
}

impl Comparison {
    pub fn reports(&self) -> Vec<MethodReport> {
        self.runs
            .iter()
            .map(|(m, runs)| MethodReport::new(*m, runs.iter().map(|r| r.record.clone()).collect()))
            .collect()
    }
}

/// Run `methods` over every seed of `cfg`. Work units are spread over `jobs`
/// threads; results do not depend on `jobs`.
pub fn run_comparison(cfg: &ExperimentConfig, methods: &[Method], jobs: usize) -> Result<Comparison> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::arg("no methods selected"));
    }
    // Preprocessing is shared by every method of a seed.
    let prepared: Vec<Prepared> = cfg.seeds.iter().map(|&s| prepare(cfg, s)).collect::<Result<_>>()?;
    let units: Vec<(usize, Method)> = (0..cfg.seeds.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    let run_unit = |&(i, m): &(usize, Method)| run_prepared(&prepared[i], cfg, m, cfg.seeds[i]);

    let jobs = jobs.clamp(1, units.len().max(1));
    let results: Vec<Result<SeedRun>> = if jobs == 1 {
        units.iter().map(run_unit).collect()
    } else {
        let mut slots: Vec<Option<Result<SeedRun>>> = (0..units.len()).map(|_| None).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        let done = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if k >= units.len() {
                        break;
                    }
                    let r = run_unit(&units[k]);
                    done.lock().expect("worker panicked")[k] = Some(r);
                });
            }
        });
        slots.into_iter().map(|r| r.expect("every unit ran")).collect()
    };

    let mut cmp = Comparison::default();
    for ((_, m), r) in units.iter().zip(results) {
        let run = r.stage(m.name())?;
        cmp.runs.entry(*m).or_default().push(run);
    }
    Ok(cmp)
}
