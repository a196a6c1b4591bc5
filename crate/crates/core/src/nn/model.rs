use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::matrix::{gemm, Matrix};
use crate::error::{Error, Result};
use crate::metrics::McPrediction;
use crate::rng::{derive_seed, rng_from};

/// Architecture and dropout rates of a three-layer classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    /// Width of the first hidden layer.
    pub l1: usize,
    /// Width of the second hidden layer.
    pub l2: usize,
    pub num_classes: usize,
    /// Dropout probability after the first hidden layer.
    pub p1: f64,
    /// Dropout probability after the second hidden layer.
    pub p2: f64,
    pub init_seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.l1 == 0 || self.l2 == 0 {
            return Err(Error::arg("layer widths must be at least 1"));
        }
        if self.num_classes < 2 {
            return Err(Error::arg("at least two classes are required"));
        }
        for p in [self.p1, self.p2] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::arg(format!("dropout probability {p} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Parameters of the network. Also used as the gradient container, since
/// gradients share the parameter shapes exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// input_dim x l1
    pub w1: Matrix,
    pub b1: Vec<f64>,
    /// l1 x l2
    pub w2: Matrix,
    pub b2: Vec<f64>,
    /// l2 x num_classes
    pub w3: Matrix,
    pub b3: Vec<f64>,
}

pub type Gradients = Params;

impl Params {
    pub fn zeros_like(cfg: &MlpConfig) -> Self {
        Params {
            w1: Matrix::zeros(cfg.input_dim, cfg.l1),
            b1: vec![0.0; cfg.l1],
            w2: Matrix::zeros(cfg.l1, cfg.l2),
            b2: vec![0.0; cfg.l2],
            w3: Matrix::zeros(cfg.l2, cfg.num_classes),
            b3: vec![0.0; cfg.num_classes],
        }
    }

    /// The six parameter blocks as flat slices, in a fixed order.
    pub fn blocks(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
            self.w3.as_slice(),
            &self.b3,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
            self.w3.as_mut_slice(),
            &mut self.b3,
        ]
    }

    pub fn norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: f64, other: &Params) {
        for (dst, src) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }
}

/// One sampled thinned network: a keep/drop mask per hidden layer, with kept
/// units scaled by `1 / (1 - p)` (inverted dropout).
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub mask1: Vec<f64>,
    pub mask2: Vec<f64>,
    pub seed: u64,
}

impl DropoutMask {
    pub fn sample(cfg: &MlpConfig, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let mut draw = |n: usize, p: f64| -> Vec<f64> {
            let keep = 1.0 / (1.0 - p);
            (0..n)
                .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
                .collect()
        };
        let mask1 = draw(cfg.l1, cfg.p1);
        let mask2 = draw(cfg.l2, cfg.p2);
        DropoutMask { mask1, mask2, seed }
    }

    /// All units kept, no scaling.
    pub fn identity(cfg: &MlpConfig) -> Self {
        DropoutMask {
            mask1: vec![1.0; cfg.l1],
            mask2: vec![1.0; cfg.l2],
            seed: 0,
        }
    }

    fn check(&self, cfg: &MlpConfig) -> Result<()> {
        if self.mask1.len() != cfg.l1 || self.mask2.len() != cfg.l2 {
            return Err(Error::shape(format!(
                "mask lengths ({}, {}) do not match layer widths ({}, {})",
                self.mask1.len(),
                self.mask2.len(),
                cfg.l1,
                cfg.l2
            )));
        }
        Ok(())
    }
}

/// Activations of a stack of passes over the same batch. Pass `m` occupies
/// rows `m*B..(m+1)*B` of every stacked matrix.
#[derive(Debug, Clone)]
pub(crate) struct PassCache {
    pub batch: usize,
    /// Pre-activation of layer 1, shared by all passes (B x l1).
    pub a1: Matrix,
    /// Masked layer-1 activations (MB x l1).
    pub h1: Matrix,
    pub a2: Matrix,
    pub h2: Matrix,
    /// Softmax outputs (MB x C).
    pub probs: Matrix,
}

/// Three dense layers: ReLU, dropout, ReLU, dropout, softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    config: MlpConfig,
    pub params: Params,
}

impl MlpModel {
    /// Uniform init in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn new(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from(derive_seed(config.init_seed, &[crate::rng::stream::INIT]));
        let mut params = Params::zeros_like(&config);
        for w in [&mut params.w1, &mut params.w2, &mut params.w3] {
            let bound = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
            for v in w.as_mut_slice() {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(MlpModel { config, params })
    }

    /// All-zero parameters; outputs the uniform distribution for any input.
    pub fn zeros(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        Ok(MlpModel {
            params: Params::zeros_like(&config),
            config,
        })
    }

    pub fn from_params(config: MlpConfig, params: Params) -> Result<Self> {
        config.validate()?;
        let expect = Params::zeros_like(&config);
        let same = expect
            .blocks()
            .iter()
            .zip(params.blocks())
            .all(|(a, b)| a.len() == b.len())
            && params.w1.shape() == expect.w1.shape()
            && params.w2.shape() == expect.w2.shape()
            && params.w3.shape() == expect.w3.shape();
        if !same {
            return Err(Error::shape("parameter shapes do not match the config"));
        }
        Ok(MlpModel { config, params })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    /// One forward pass. Without a mask the pass is deterministic and no
    /// rescaling is needed (inverted dropout).
    pub fn forward(&self, batch: &Matrix, mask: Option<&DropoutMask>) -> Result<Matrix> {
        let identity;
        let mask = match mask {
            Some(m) => m,
            None => {
                identity = DropoutMask::identity(&self.config);
                &identity
            }
        };
        Ok(self.forward_passes(batch, std::slice::from_ref(mask))?.probs)
    }

    /// `t_passes` stochastic passes; pass `m` uses the mask seeded from
    /// `(seed, m)`.
    pub fn mc_forward(&self, batch: &Matrix, t_passes: usize, seed: u64) -> Result<McPrediction> {
        if t_passes == 0 {
            return Err(Error::arg("at least one MC pass is required"));
        }
        const CHUNK: usize = 16;
        let b = batch.rows();
        let c = self.config.num_classes;
        let mut probs = Vec::with_capacity(t_passes * b * c);
        let mut start = 0;
        while start < t_passes {
            let end = (start + CHUNK).min(t_passes);
            let masks: Vec<_> = (start..end)
                .map(|m| DropoutMask::sample(&self.config, mc_mask_seed(seed, m)))
                .collect();
            let cache = self.forward_passes(batch, &masks)?;
            probs.extend_from_slice(cache.probs.as_slice());
            start = end;
        }
        McPrediction::new(t_passes, b, c, probs)
    }

    pub(crate) fn forward_passes(&self, x: &Matrix, masks: &[DropoutMask]) -> Result<PassCache> {
        let cfg = &self.config;
        if x.cols() != cfg.input_dim {
            return Err(Error::shape(format!(
                "batch has {} features, model expects {}",
                x.cols(),
                cfg.input_dim
            )));
        }
        if masks.is_empty() {
            return Err(Error::arg("at least one pass is required"));
        }
        for m in masks {
            m.check(cfg)?;
        }
        let b = x.rows();
        let mb = b * masks.len();
        let p = &self.params;

        let mut a1 = Matrix::zeros(b, cfg.l1);
        broadcast_rows(&mut a1, &p.b1);
        gemm(x, false, &p.w1, false, &mut a1, 1.0);

        let mut h1 = Matrix::zeros(mb, cfg.l1);
        for (m, mask) in masks.iter().enumerate() {
            for r in 0..b {
                let src = a1.row(r);
                let dst = h1.row_mut(m * b + r);
                for ((d, &s), &k) in dst.iter_mut().zip(src).zip(&mask.mask1) {
                    *d = s.max(0.0) * k;
                }
            }
        }

        let mut a2 = Matrix::zeros(mb, cfg.l2);
        broadcast_rows(&mut a2, &p.b2);
        gemm(&h1, false, &p.w2, false, &mut a2, 1.0);

        let mut h2 = Matrix::zeros(mb, cfg.l2);
        for (m, mask) in masks.iter().enumerate() {
            for r in m * b..(m + 1) * b {
                for ((d, &s), &k) in h2.row_mut(r).iter_mut().zip(a2.row(r)).zip(&mask.mask2) {
                    *d = s.max(0.0) * k;
                }
            }
        }

        let mut probs = Matrix::zeros(mb, cfg.num_classes);
        broadcast_rows(&mut probs, &p.b3);
        gemm(&h2, false, &p.w3, false, &mut probs, 1.0);
        for r in 0..mb {
            softmax_in_place(probs.row_mut(r));
        }

        Ok(PassCache {
            batch: b,
            a1,
            h1,
            a2,
            h2,
            probs,
        })
    }
}

pub(crate) fn mc_mask_seed(seed: u64, pass: usize) -> u64 {
    derive_seed(seed, &[crate::rng::stream::EVAL_MASK, pass as u64])
}

fn broadcast_rows(m: &mut Matrix, bias: &[f64]) {
    for r in 0..m.rows() {
        m.row_mut(r).copy_from_slice(bias);
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}
