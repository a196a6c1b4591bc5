use super::loss::{loss_and_prob_grad, LossSpec};
use super::matrix::{gemm, Matrix};
use super::model::{DropoutMask, Gradients, MlpModel, Params};
use crate::error::{Error, Result};

/// Loss of `model` on one batch, with the given masks held fixed (one pass
/// per mask).
pub fn loss_value(
    model: &MlpModel,
    batch: &Matrix,
    labels: &[usize],
    loss: LossSpec,
    masks: &[DropoutMask],
) -> Result<f64> {
    let cache = model.forward_passes(batch, masks)?;
    let c = model.config().num_classes;
    Ok(loss_and_prob_grad(loss, cache.probs.as_slice(), masks.len(), batch.rows(), c, labels, false)?.0)
}

/// Exact gradient of the loss with the dropout masks held fixed.
pub fn backward(
    model: &MlpModel,
    batch: &Matrix,
    labels: &[usize],
    loss: LossSpec,
    masks: &[DropoutMask],
) -> Result<Gradients> {
    Ok(loss_and_gradient(model, batch, labels, loss, masks)?.1)
}

pub fn loss_and_gradient(
    model: &MlpModel,
    batch: &Matrix,
    labels: &[usize],
    loss: LossSpec,
    masks: &[DropoutMask],
) -> Result<(f64, Gradients)> {
    let cfg = model.config();
    let cache = model.forward_passes(batch, masks)?;
    let b = cache.batch;
    let m = masks.len();
    let c = cfg.num_classes;
    let (value, dprobs) = loss_and_prob_grad(loss, cache.probs.as_slice(), m, b, c, labels, true)?;

    // softmax: dz = p * (g - <g, p>)
    let mut dz = Matrix::from_raw(m * b, c, dprobs);
    for r in 0..m * b {
        let p = cache.probs.row(r);
        let g = dz.row_mut(r);
        let dot: f64 = g.iter().zip(p).map(|(g, p)| g * p).sum();
        for (g, &p) in g.iter_mut().zip(p) {
            *g = p * (*g - dot);
        }
    }

    let p = &model.params;
    let mut grads = Params::zeros_like(cfg);

    gemm(&cache.h2, true, &dz, false, &mut grads.w3, 0.0);
    column_sums(&dz, &mut grads.b3);

    let mut da2 = Matrix::zeros(m * b, cfg.l2);
    gemm(&dz, false, &p.w3, true, &mut da2, 0.0);
    for (pass, mask) in masks.iter().enumerate() {
        for r in pass * b..(pass + 1) * b {
            let pre = cache.a2.row(r);
            for ((g, &a), &k) in da2.row_mut(r).iter_mut().zip(pre).zip(&mask.mask2) {
                *g = if a > 0.0 { *g * k } else { 0.0 };
            }
        }
    }
    gemm(&cache.h1, true, &da2, false, &mut grads.w2, 0.0);
    column_sums(&da2, &mut grads.b2);

    let mut dh1 = Matrix::zeros(m * b, cfg.l1);
    gemm(&da2, false, &p.w2, true, &mut dh1, 0.0);
    // layer 1 pre-activations are shared by all passes, so the per-pass
    // contributions are summed before the last product
    let mut da1 = Matrix::zeros(b, cfg.l1);
    for (pass, mask) in masks.iter().enumerate() {
        for r in 0..b {
            let pre = cache.a1.row(r);
            let src = dh1.row(pass * b + r);
            for (((g, &s), &a), &k) in da1.row_mut(r).iter_mut().zip(src).zip(pre).zip(&mask.mask1) {
                if a > 0.0 {
                    *g += s * k;
                }
            }
        }
    }
    gemm(batch, true, &da1, false, &mut grads.w1, 0.0);
    column_sums(&da1, &mut grads.b1);

    Ok((value, grads))
}

fn column_sums(m: &Matrix, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for row in m.iter_rows() {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// Central-difference gradient, one parameter at a time. Test oracle for
/// [`backward`]; cost is two forward passes per parameter.
pub fn numeric_gradient(
    model: &MlpModel,
    batch: &Matrix,
    labels: &[usize],
    loss: LossSpec,
    masks: &[DropoutMask],
    h: f64,
) -> Result<Gradients> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("finite-difference step must be positive, got {h}")));
    }
    let mut work = model.clone();
    let mut grads = Params::zeros_like(model.config());
    for block in 0..6 {
        let n = work.params.blocks()[block].len();
        for i in 0..n {
            let orig = work.params.blocks()[block][i];
            work.params.blocks_mut()[block][i] = orig + h;
            let up = loss_value(&work, batch, labels, loss, masks)?;
            work.params.blocks_mut()[block][i] = orig - h;
            let down = loss_value(&work, batch, labels, loss, masks)?;
            work.params.blocks_mut()[block][i] = orig;
            grads.blocks_mut()[block][i] = (up - down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Central difference of a scalar function.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("finite-difference step must be positive, got {h}")));
    }
    Ok((f(x + h) - f(x - h)) / (2.0 * h))
}

/// Largest entrywise relative error between two gradients, with magnitudes
/// below `1e-6` treated as `1e-6`.
pub fn max_relative_error(a: &Gradients, b: &Gradients) -> f64 {
    a.blocks()
        .iter()
        .zip(b.blocks())
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
        .fold(0.0, f64::max)
}
