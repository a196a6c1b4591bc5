//! The five-method comparison pipeline and its report writers.

mod report;
mod run;

pub use report::{
    aggregate, emit_pe_histogram, emit_report, emit_threshold_curve, pe_histogram, Aggregate, HistogramBin,
    MethodReport, ReportFormat, SeedRecord, METRICS,
};
pub use run::{
    plan, prepare, run_comparison, run_method, run_prepared, search_hyperparams, Comparison, Prepared, RunPlan,
    SearchOutcome, SeedRun, TestOutputs,
};

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, make_circles, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::hyperopt::{FitnessConfig, Hyperparams, OptimizerConfig, OptimizerKind, SearchSpace};
use crate::nn::{LossKind, TrainConfig};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    Circles {
        n: usize,
        noise: f64,
        factor: f64,
        /// Fixed generator seed; derived from the run seed when absent.
        seed: Option<u64>,
    },
    Csv {
        path: PathBuf,
        label: LabelColumn,
        has_header: bool,
    },
}

impl DatasetSpec {
    pub fn circles(n: usize, noise: f64) -> Self {
        DatasetSpec::Circles {
            n,
            noise,
            factor: 0.8,
            seed: None,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, DatasetSpec::Circles { .. })
    }

    pub fn build(&self, run_seed: u64) -> Result<Dataset> {
        match self {
            DatasetSpec::Circles { n, noise, factor, seed } => {
                let s = seed.unwrap_or_else(|| derive_seed(run_seed, &[stream::DATA]));
                make_circles(*n, *noise, *factor, s)
            }
            DatasetSpec::Csv { path, label, has_header } => load_csv(path, label, *has_header),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    /// `circles`, `circles:n=1000,noise=0.05,factor=0.8,seed=3`, `csv:<path>`,
    /// or a bare path to a CSV file whose last column is the label.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("circles") {
            let (mut n, mut noise, mut factor, mut seed) = (1000, 0.05, 0.8, None);
            let rest = match rest.strip_prefix(':') {
                Some(r) => r,
                None if rest.is_empty() => "",
                None => return Err(Error::arg(format!("bad dataset spec {s:?}"))),
            };
            for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::arg(format!("expected key=value in dataset spec, got {kv:?}")))?;
                let bad = |e: &dyn std::fmt::Display| Error::arg(format!("circles {}: {e}", k.trim()));
                match k.trim() {
                    "n" => n = v.trim().parse().map_err(|e| bad(&e))?,
                    "noise" => noise = v.trim().parse().map_err(|e| bad(&e))?,
                    "factor" => factor = v.trim().parse().map_err(|e| bad(&e))?,
                    "seed" => seed = Some(v.trim().parse().map_err(|e| bad(&e))?),
                    other => return Err(Error::arg(format!("unknown circles parameter {other:?}"))),
                }
            }
            return Ok(DatasetSpec::Circles { n, noise, factor, seed });
        }
        let path = s.strip_prefix("csv:").unwrap_or(s);
        if path.is_empty() {
            return Err(Error::arg("empty dataset path"));
        }
        Ok(DatasetSpec::Csv {
            path: PathBuf::from(path),
            label: LabelColumn::Last,
            has_header: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcd,
    McdPe,
    McdGwo,
    McdBo,
    McdPso,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mcd, Method::McdPe, Method::McdGwo, Method::McdBo, Method::McdPso];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mcd => "mcd",
            Method::McdPe => "mcd_pe",
            Method::McdGwo => "mcd_gwo",
            Method::McdBo => "mcd_bo",
            Method::McdPso => "mcd_pso",
        }
    }

    pub fn optimizer(self) -> Option<OptimizerKind> {
        match self {
            Method::McdGwo => Some(OptimizerKind::Gwo),
            Method::McdBo => Some(OptimizerKind::Bo),
            Method::McdPso => Some(OptimizerKind::Pso),
            Method::Mcd | Method::McdPe => None,
        }
    }

    pub fn loss_kind(self) -> LossKind {
        match self {
            Method::Mcd => LossKind::StandardCe,
            _ => LossKind::UncertaintyAware,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown method {s:?} (expected mcd, mcd_pe, mcd_gwo, mcd_bo or mcd_pso)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub eval_mc_passes: usize,
    pub uacc_threshold: f64,
    pub ece_bins: usize,
    pub test_fraction: f64,
    /// Share of the training split held out as the fitness validation fold.
    pub fold_fraction: f64,
    pub pca_components: Option<usize>,
    /// Final-model training; `loss_kind` and `seed` are set per method and seed.
    pub train: TrainConfig,
    /// Architecture for the non-searched methods.
    pub baseline: Hyperparams,
    pub search_space: SearchSpace,
    pub optimizer: OptimizerConfig,
    pub fitness: FitnessConfig,
}

impl ExperimentConfig {
    /// Defaults for `dataset`: learning rate 0.05 on synthetic data, 0.1 on CSV data.
    pub fn new(dataset: DatasetSpec, method: Method) -> Self {
        let lr = if dataset.is_synthetic() { 0.05 } else { 0.1 };
        let mut fitness = FitnessConfig::default();
        fitness.train.learning_rate = lr;
        ExperimentConfig {
            dataset,
            method,
            seeds: (0..10).collect(),
            eval_mc_passes: 50,
            uacc_threshold: 0.5,
            ece_bins: 10,
            test_fraction: 0.2,
            fold_fraction: 0.25,
            pca_components: None,
            train: TrainConfig {
                learning_rate: lr,
                ..TrainConfig::default()
            },
            baseline: Hyperparams {
                l1: 64,
                l2: 16,
                p1: 0.2,
                p2: 0.2,
            },
            search_space: SearchSpace::mlp_default(),
            optimizer: OptimizerConfig::default(),
            fitness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::arg("at least one seed is required"));
        }
        if self.eval_mc_passes == 0 {
            return Err(Error::arg("eval_mc_passes must be at least 1"));
        }
        if self.ece_bins == 0 {
            return Err(Error::arg("ece_bins must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.uacc_threshold) {
            return Err(Error::arg("uacc_threshold must lie in [0, 1]"));
        }
        for (name, f) in [("test_fraction", self.test_fraction), ("fold_fraction", self.fold_fraction)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::arg(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.pca_components == Some(0) {
            return Err(Error::arg("pca_components must be at least 1"));
        }
        if self.search_space.len() != 4 {
            return Err(Error::arg("search space must have the (l1, l2, p1, p2) dimensions"));
        }
        self.train.validate()?;
        self.fitness.train.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_dataset_specs() {
        assert_eq!("circles".parse::<DatasetSpec>().unwrap(), DatasetSpec::circles(1000, 0.05));
        assert_eq!(
            "circles:n=200,noise=0.07,seed=4".parse::<DatasetSpec>().unwrap(),
            DatasetSpec::Circles {
                n: 200,
                noise: 0.07,
                factor: 0.8,
                seed: Some(4)
            }
        );
        assert!("circles:n=abc".parse::<DatasetSpec>().is_err());
        assert!("circles:radius=2".parse::<DatasetSpec>().is_err());
        assert!("circlesx".parse::<DatasetSpec>().is_err());
        match "csv:data/w.csv".parse::<DatasetSpec>().unwrap() {
            DatasetSpec::Csv { path, .. } => assert_eq!(path, PathBuf::from("data/w.csv")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("mcd_sa".parse::<Method>().is_err());
        assert_eq!(Method::Mcd.loss_kind(), LossKind::StandardCe);
        assert_eq!(Method::McdPe.loss_kind(), LossKind::UncertaintyAware);
        assert_eq!(Method::McdPe.optimizer(), None);
    }
}
