use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

const STD_FLOOR: f64 = 1e-12;

/// Per-feature location and scale estimated on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Population mean and standard deviation per feature, std floored at 1e-12.
pub fn standardize_fit(train: &Dataset) -> Result<Standardizer> {
    if train.is_empty() {
        return Err(Error::arg("cannot standardize with an empty training set"));
    }
    let n = train.len() as f64;
    let d = train.dim();
    let mut means = vec![0.0; d];
    for row in train.features.iter_rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; d];
    for row in train.features.iter_rows() {
        for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    let stds = vars.into_iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
    Ok(Standardizer { means, stds })
}

pub fn standardize_apply(ds: &Dataset, stats: &Standardizer) -> Result<Dataset> {
    if ds.dim() != stats.means.len() {
        return Err(Error::shape(format!(
            "dataset has {} features, standardizer {}",
            ds.dim(),
            stats.means.len()
        )));
    }
    let mut data = ds.features.as_slice().to_vec();
    let d = ds.dim().max(1);
    for row in data.chunks_exact_mut(d) {
        for ((v, m), s) in row.iter_mut().zip(&stats.means).zip(&stats.stds) {
            *v = (*v - m) / s;
        }
    }
    let mut out = ds.with_features(Matrix::from_vec(ds.len(), ds.dim(), data)?);
    out.feature_names = ds.feature_names.clone();
    Ok(out)
}
