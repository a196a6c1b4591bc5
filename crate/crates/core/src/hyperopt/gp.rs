use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BASE_JITTER: f64 = 1e-10;
const JITTER_ESCALATIONS: usize = 3;
const VARIANCE_FLOOR: f64 = 1e-12;

/// Squared-exponential GP surrogate over unit-cube inputs.
///
/// Targets are modelled as `mean + σ²·R` where `R` is the correlation matrix
/// `exp(−‖x−x'‖²/(2ℓ²))`, which is a zero-mean prior on standardized values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    prior_mean: f64,
    signal_variance: f64,
    length_scale: f64,
    jitter: f64,
    /// Row-major lower Cholesky factor of `R + jitter·I`.
    chol: Vec<f64>,
    /// `(R + jitter·I)⁻¹ (y − mean)`
    weights: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of pairwise Euclidean distances; 1.0 when undefined or zero.
pub fn median_length_scale(inputs: &[Vec<f64>]) -> f64 {
    let mut d = Vec::new();
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            d.push(sq_dist(&inputs[i], &inputs[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) };
    if med > 1e-12 {
        med
    } else {
        1.0
    }
}

/// In-place lower Cholesky of a row-major SPD matrix. `None` if not positive definite.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn backward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

impl GpModel {
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }
    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }
    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }
    /// Diagonal jitter actually used, relative to the signal variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    /// Full kernel `σ²·exp(−‖a−b‖²/(2ℓ²))`.
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        self.signal_variance * self.correlation(a, b)
    }

    fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        (-sq_dist(a, b) / (2.0 * self.length_scale * self.length_scale)).exp()
    }
}

pub fn gp_fit(inputs: &[Vec<f64>], targets: &[f64]) -> Result<GpModel> {
    let n = inputs.len();
    if n == 0 || targets.len() != n {
        return Err(Error::shape(format!("gp_fit: {} inputs, {} targets", n, targets.len())));
    }
    let dim = inputs[0].len();
    if inputs.iter().any(|x| x.len() != dim) {
        return Err(Error::shape("gp_fit: ragged inputs"));
    }
    if inputs.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("gp_fit: non-finite observation".into()));
    }
    let prior_mean = targets.iter().sum::<f64>() / n as f64;
    let var = targets.iter().map(|y| (y - prior_mean).powi(2)).sum::<f64>() / n as f64;
    let mut model = GpModel {
        inputs: inputs.to_vec(),
        targets: targets.to_vec(),
        prior_mean,
        signal_variance: var.max(VARIANCE_FLOOR),
        length_scale: median_length_scale(inputs),
        jitter: BASE_JITTER,
        chol: Vec::new(),
        weights: Vec::new(),
    };
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = model.correlation(&inputs[i], &inputs[j]);
        }
    }
    let mut jitter = BASE_JITTER;
    for attempt in 0..=JITTER_ESCALATIONS {
        let mut a = r.clone();
        for i in 0..n {
            a[i * n + i] += jitter;
        }
        if let Some(l) = cholesky(&a, n) {
            let centered: Vec<f64> = targets.iter().map(|y| y - prior_mean).collect();
            let z = forward_sub(&l, n, &centered);
            model.weights = backward_sub(&l, n, &z);
            model.chol = l;
            model.jitter = jitter;
            return Ok(model);
        }
        if attempt < JITTER_ESCALATIONS {
            jitter *= 10.0;
        }
    }
    Err(Error::Numerical(format!(
        "kernel matrix not positive definite after jitter {jitter:e}"
    )))
}

/// Posterior `(mean, variance)` at `query`; variance floored at 0.
pub fn gp_predict(model: &GpModel, query: &[f64]) -> (f64, f64) {
    let n = model.inputs.len();
    let r: Vec<f64> = model.inputs.iter().map(|x| model.correlation(x, query)).collect();
    let mean = model.prior_mean + r.iter().zip(&model.weights).map(|(a, b)| a * b).sum::<f64>();
    let v = forward_sub(&model.chol, n, &r);
    let reduction: f64 = v.iter().map(|x| x * x).sum();
    let var = model.signal_variance * (1.0 - reduction);
    (mean, var.max(0.0))
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement below `f_best` (minimization).
pub fn expected_improvement(mean: f64, variance: f64, f_best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    let gain = f_best - mean;
    if sigma == 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    (gain * std_normal_cdf(z) + sigma * std_normal_pdf(z)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_interpolates() {
        let m = gp_fit(&[vec![0.3, 0.6]], &[2.5]).unwrap();
        let (mu, var) = gp_predict(&m, &[0.3, 0.6]);
        assert!((mu - 2.5).abs() < 1e-6);
        assert!(var <= 1e-5 * m.signal_variance());
    }

    #[test]
    fn far_query_reverts_to_prior() {
        let m = gp_fit(&[vec![0.0], vec![0.2], vec![0.5]], &[1.0, 3.0, 2.0]).unwrap();
        let far = [10.0 * m.length_scale() + 0.5];
        let (mu, var) = gp_predict(&m, &far);
        assert!((mu - m.prior_mean()).abs() < 1e-9);
        assert!((var / m.signal_variance() - 1.0).abs() < 0.01);
    }

    #[test]
    fn duplicates_are_absorbed_by_jitter() {
        let x = vec![vec![0.5]; 4];
        let m = gp_fit(&x, &[1.0, 1.1, 0.9, 1.0]).unwrap();
        let (mu, _) = gp_predict(&m, &[0.5]);
        assert!((mu - 1.0).abs() < 1e-3);
    }

    #[test]
    fn median_heuristic() {
        let x = vec![vec![0.0], vec![0.1], vec![0.4]];
        // distances 0.1, 0.3, 0.4
        assert!((median_length_scale(&x) - 0.3).abs() < 1e-15);
        assert_eq!(median_length_scale(&[vec![0.2]]), 1.0);
    }

    #[test]
    fn ei_reference_values() {
        assert_eq!(expected_improvement(1.0, 0.0, 0.5), 0.0);
        assert_eq!(expected_improvement(0.25, 0.0, 0.5), 0.25);
        assert!((expected_improvement(0.0, 1.0, 0.0) - 0.3989423).abs() < 1e-7);
        let mut prev = 0.0;
        for s in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let ei = expected_improvement(0.0, s * s, 0.0);
            assert!(ei > prev);
            prev = ei;
        }
    }

    #[test]
    fn cdf_reference_values() {
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-7);
        assert!((std_normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-7);
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-15);
    }
}
