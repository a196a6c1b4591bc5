use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn stratified(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            seed,
            stratified: true,
        }
    }
}

/// Disjoint, ascending index sets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified splits take `round(n_c * test_fraction)` samples of every
/// class `c` into the test side.
pub fn split_indices(labels: &[usize], num_classes: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::arg(format!("test_fraction {} outside (0, 1)", spec.test_fraction)));
    }
    let mut rng = rng_from(spec.seed);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut g = vec![Vec::new(); num_classes];
        for (i, &l) in labels.iter().enumerate() {
            g[l].push(i);
        }
        g
    } else {
        vec![(0..labels.len()).collect()]
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * spec.test_fraction).round() as usize;
        if spec.stratified && n_test >= members.len() {
            return Err(Error::arg(format!(
                "test_fraction {} leaves class {class} without training samples",
                spec.test_fraction
            )));
        }
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::arg(format!(
            "test_fraction {} on {} samples leaves one side empty",
            spec.test_fraction,
            labels.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(&ds.labels, ds.num_classes, spec)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.test)))
}
