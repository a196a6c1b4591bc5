use nalgebra::{DMatrix, DVector};

// direct solve with the full kernel, no Cholesky reuse
pub fn dense_posterior(x: &[Vec<f64>], y: &[f64], ell: f64, jitter: f64, q: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mu = y.iter().sum::<f64>() / n as f64;
    let s2 = (y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64).max(1e-12);
    let k = |a: &[f64], b: &[f64]| {
        let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum();
        s2 * (-d2 / (2.0 * ell * ell)).exp()
    };
    let big_k = DMatrix::from_fn(n, n, |i, j| k(&x[i], &x[j]) + if i == j { s2 * jitter } else { 0.0 });
    let kq = DVector::from_fn(n, |i, _| k(&x[i], q));
    let yc = DVector::from_fn(n, |i, _| y[i] - mu);
    let inv = big_k.try_inverse().expect("invertible");
    let mean = mu + (kq.transpose() * &inv * yc)[(0, 0)];
    let var = s2 - (kq.transpose() * &inv * &kq)[(0, 0)];
    (mean, var.max(0.0))
}
