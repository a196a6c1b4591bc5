//! Losses on predicted probabilities, and their gradients with respect to
//! those probabilities.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::metrics::McPrediction;

/// Probabilities are clamped to `[PROB_FLOOR, 1]` before every logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    StandardCe,
    UncertaintyAware,
}

/// A loss together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    /// Categorical cross-entropy, averaged over samples and passes.
    CrossEntropy,
    /// Binary cross-entropy of the pass-averaged positive-class probability
    /// plus `beta / M` times the summed per-pass predictive entropy.
    UncertaintyAware { beta: f64 },
}

#[inline]
fn clog(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0).ln()
}

#[inline]
fn clog2(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0).log2()
}

fn check_labels(labels: &[usize], batch: usize, classes: usize) -> Result<()> {
    if labels.len() != batch {
        return Err(Error::shape(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::arg(format!("label {bad} out of range for {classes} classes")));
    }
    Ok(())
}

/// Mean negative log-likelihood of the true labels.
pub fn cross_entropy_loss(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    check_labels(labels, probs.rows(), probs.cols())?;
    if labels.is_empty() {
        return Err(Error::arg("empty batch"));
    }
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(b, &y)| -clog(probs.get(b, y)))
        .sum();
    Ok(total / labels.len() as f64)
}

/// Uncertainty-aware loss over `M` stochastic passes of a binary classifier.
pub fn uncertainty_aware_loss(pass_probs: &McPrediction, labels: &[usize], beta: f64) -> Result<f64> {
    let (m, b, c) = pass_probs.dims();
    Ok(loss_and_prob_grad(
        LossSpec::UncertaintyAware { beta },
        pass_probs.as_slice(),
        m,
        b,
        c,
        labels,
        false,
    )?
    .0)
}

/// Entropy of a simplex row in base 2, normalized by `log2(C)`.
pub(crate) fn normalized_entropy(row: &[f64]) -> f64 {
    let h: f64 = row
        .iter()
        .map(|&p| if p > 0.0 { -p * clog2(p) } else { 0.0 })
        .sum();
    h / (row.len() as f64).log2()
}

/// Loss over stacked pass probabilities (`m` passes of `b x c`, pass-major)
/// and, if requested, `dLoss/dprobs` in the same layout.
pub(crate) fn loss_and_prob_grad(
    spec: LossSpec,
    probs: &[f64],
    m: usize,
    b: usize,
    c: usize,
    labels: &[usize],
    want_grad: bool,
) -> Result<(f64, Vec<f64>)> {
    check_labels(labels, b, c)?;
    if m == 0 {
        return Err(Error::arg("at least one pass is required"));
    }
    if b == 0 {
        return Err(Error::arg("empty batch"));
    }
    debug_assert_eq!(probs.len(), m * b * c);
    let mut grad = if want_grad { vec![0.0; probs.len()] } else { Vec::new() };
    let inv_b = 1.0 / b as f64;
    let inv_m = 1.0 / m as f64;

    match spec {
        LossSpec::CrossEntropy => {
            let mut total = 0.0;
            for pass in 0..m {
                for (s, &y) in labels.iter().enumerate() {
                    let idx = (pass * b + s) * c + y;
                    let p = probs[idx];
                    total -= clog(p);
                    if want_grad && p > PROB_FLOOR && p <= 1.0 {
                        grad[idx] = -inv_b * inv_m / p;
                    }
                }
            }
            Ok((total * inv_b * inv_m, grad))
        }
        LossSpec::UncertaintyAware { beta } => {
            if c != 2 {
                return Err(Error::Unsupported(format!(
                    "the uncertainty-aware loss is binary; got {c} classes"
                )));
            }
            let penalty = beta * inv_m;
            let mut total = 0.0;
            for (s, &y) in labels.iter().enumerate() {
                let mu = (0..m).map(|pass| probs[(pass * b + s) * 2 + 1]).sum::<f64>() * inv_m;
                let (bce, dbce) = if y == 1 {
                    let g = if mu > PROB_FLOOR && mu <= 1.0 { -1.0 / mu } else { 0.0 };
                    (-clog(mu), g)
                } else {
                    let q = 1.0 - mu;
                    let g = if q > PROB_FLOOR && q <= 1.0 { 1.0 / q } else { 0.0 };
                    (-clog(q), g)
                };
                total += bce;
                for pass in 0..m {
                    let base = (pass * b + s) * 2;
                    let row = &probs[base..base + 2];
                    total += penalty * normalized_entropy(row);
                    if want_grad {
                        grad[base + 1] += inv_b * inv_m * dbce;
                        for k in 0..2 {
                            let p = row[k];
                            let active = if p > PROB_FLOOR && p <= 1.0 {
                                std::f64::consts::LOG2_E
                            } else {
                                0.0
                            };
                            grad[base + k] += inv_b * penalty * -(clog2(p) + active);
                        }
                    }
                }
            }
            Ok((total * inv_b, grad))
        }
    }
}
