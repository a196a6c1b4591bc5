//! Monte Carlo dropout classifiers with an uncertainty-aware training loss,
//! calibration metrics, and Grey Wolf / Particle Swarm / Bayesian
//! hyperparameter search.
//!
//! The crate is organised bottom-up:
//!
//! * [`nn`] – a fixed three-layer dense network with sampled dropout masks,
//!   analytic backpropagation and mini-batch SGD.
//! * [`metrics`] – predictive mean and entropy, uncertainty confusion matrix,
//!   ECE, ROC-AUC and PE group centers.
//! * [`hyperopt`] – search spaces, fitness evaluation and the three optimizers.
//! * [`data`] – synthetic circles, CSV ingestion, standardization, PCA and
//!   stratified splitting.
//! * [`experiment`] – the five-method comparison pipeline and report writers.

pub mod data;
pub mod error;
pub mod experiment;
pub mod hyperopt;
pub mod metrics;
pub mod nn;
pub mod rng;

pub use data::Dataset;
pub use error::{Error, Result};
pub use metrics::McPrediction;
pub use nn::{LossKind, Matrix, MlpConfig, MlpModel, TrainConfig};
