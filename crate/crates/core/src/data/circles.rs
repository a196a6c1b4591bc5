use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::rng_from;

/// Two concentric circles: `n/2` points at equally spaced angles on the unit
/// circle (label 0) and `n/2` on the circle of radius `factor` (label 1), each
/// coordinate perturbed by Gaussian noise of standard deviation `noise`.
pub fn make_circles(n: usize, noise: f64, factor: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::arg(format!("circles needs an even n >= 2, got {n}")));
    }
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::arg(format!("factor must lie in (0, 1), got {factor}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::arg(format!("noise must be nonnegative, got {noise}")));
    }
    let half = n / 2;
    let mut rng = rng_from(seed);
    let normal = Normal::new(0.0, noise).map_err(|e| Error::arg(e.to_string()))?;
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (label, radius) in [(0usize, 1.0), (1, factor)] {
        for i in 0..half {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / half as f64;
            let (s, c) = theta.sin_cos();
            data.push(radius * c + normal.sample(&mut rng));
            data.push(radius * s + normal.sample(&mut rng));
            labels.push(label);
        }
    }
    let mut ds = Dataset::new(
        Matrix::from_vec(n, 2, data)?,
        labels,
        2,
        format!("circles(n={n},noise={noise},factor={factor},seed={seed})"),
    )?;
    ds.feature_names = Some(vec!["x0".into(), "x1".into()]);
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radius(r: &[f64]) -> f64 {
        (r[0] * r[0] + r[1] * r[1]).sqrt()
    }

    #[test]
    fn noiseless_geometry() {
        let ds = make_circles(100, 0.0, 0.8, 1).unwrap();
        for (row, &l) in ds.features.iter_rows().zip(&ds.labels) {
            let expect = if l == 0 { 1.0 } else { 0.8 };
            assert!((radius(row) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_and_deterministic() {
        let ds = make_circles(1000, 0.05, 0.8, 7).unwrap();
        assert_eq!(ds.class_counts(), vec![500, 500]);
        assert_eq!(ds, make_circles(1000, 0.05, 0.8, 7).unwrap());
        assert_ne!(ds.features, make_circles(1000, 0.05, 0.8, 8).unwrap().features);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_circles(5, 0.1, 0.8, 0).is_err());
        assert!(make_circles(10, 0.1, 1.0, 0).is_err());
        assert!(make_circles(10, -0.1, 0.5, 0).is_err());
    }

    #[test]
    fn radial_noise_matches_requested_std() {
        // Projected onto the radius, isotropic noise keeps its per-coordinate
        // standard deviation (to first order in noise / radius).
        let ds = make_circles(10_000, 0.05, 0.8, 3).unwrap();
        let resid: Vec<f64> = ds
            .features
            .iter_rows()
            .zip(&ds.labels)
            .map(|(r, &l)| radius(r) - if l == 0 { 1.0 } else { 0.8 })
            .collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - 0.05).abs() / 0.05 < 0.05, "{sd}");
    }
}
