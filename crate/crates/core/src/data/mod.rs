//! Datasets and preprocessing.

mod circles;
mod csv;
mod pca;
mod split;
mod standardize;

pub use self::circles::make_circles;
pub use self::csv::{load_csv, read_csv, write_csv, LabelColumn};
pub use self::pca::{jacobi_eigen, pca_fit, pca_transform, PcaModel, SymmetricEigen};
pub use self::split::{split, split_indices, SplitIndices, SplitSpec};
pub use self::standardize::{standardize_apply, standardize_fit, Standardizer};

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `N x D`
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub feature_names: Option<Vec<String>>,
    /// Free-form provenance, e.g. generator parameters or label mapping.
    pub source: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize, source: impl Into<String>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::arg(format!("label {bad} out of range for {num_classes} classes")));
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
            feature_names: None,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Rows `idx`, in order; class count and metadata carried over.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            feature_names: self.feature_names.clone(),
            source: self.source.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub(crate) fn with_features(&self, features: Matrix) -> Dataset {
        Dataset {
            features,
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            feature_names: None,
            source: self.source.clone(),
        }
    }
}
