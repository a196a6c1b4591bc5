use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by decreasing eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row `i` is the unit eigenvector of `values[i]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-10 * max(1, ||A||_F)`.
pub fn jacobi_eigen(sym: &Matrix) -> Result<SymmetricEigen> {
    let n = sym.rows();
    if sym.cols() != n {
        return Err(Error::shape("eigendecomposition needs a square matrix"));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (sym.get(i, j), sym.get(j, i));
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::arg("matrix is not symmetric"));
            }
        }
    }
    let mut a: Vec<f64> = sym.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let tol = 1e-10 * sym.frobenius_norm().max(1.0);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) >= tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (r, &col) in order.iter().enumerate() {
        let row = vectors.row_mut(r);
        for k in 0..n {
            row[k] = v[k * n + col];
        }
        // sign convention: the largest-magnitude entry is positive
        let pivot = row
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SymmetricEigen { values, vectors, sweeps })
}

/// Principal axes fitted on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x D`, orthonormal rows.
    pub components: Matrix,
    /// Nonincreasing.
    pub explained_variance: Vec<f64>,
}

/// Top-`k` eigenvectors of the sample covariance (denominator `N - 1`).
pub fn pca_fit(ds: &Dataset, k: usize) -> Result<PcaModel> {
    let (n, d) = ds.features.shape();
    if k == 0 || k > n.min(d) {
        return Err(Error::arg(format!("k = {k} must lie in 1..={}", n.min(d))));
    }
    let mut mean = vec![0.0; d];
    for row in ds.features.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = ds.features.clone();
    for r in 0..n {
        for (v, m) in centered.row_mut(r).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let mut cov = Matrix::zeros(d, d);
    crate::nn::gemm(&centered, true, &centered, false, &mut cov, 0.0);
    let denom = (n.max(2) - 1) as f64;
    for v in cov.as_mut_slice() {
        *v /= denom;
    }
    // exact symmetry for the Jacobi check
    for i in 0..d {
        for j in 0..i {
            let s = 0.5 * (cov.get(i, j) + cov.get(j, i));
            cov.set(i, j, s);
            cov.set(j, i, s);
        }
    }
    let eig = jacobi_eigen(&cov)?;
    let idx: Vec<usize> = (0..k).collect();
    Ok(PcaModel {
        mean,
        components: eig.vectors.select_rows(&idx),
        explained_variance: eig.values[..k].iter().map(|v| v.max(0.0)).collect(),
    })
}

/// `(x - mean) * components^T`
pub fn pca_transform(ds: &Dataset, model: &PcaModel) -> Result<Dataset> {
    if ds.dim() != model.mean.len() {
        return Err(Error::shape(format!(
            "dataset has {} features, PCA model {}",
            ds.dim(),
            model.mean.len()
        )));
    }
    let mut centered = ds.features.clone();
    for r in 0..ds.len() {
        for (v, m) in centered.row_mut(r).iter_mut().zip(&model.mean) {
            *v -= m;
        }
    }
    let projected = centered.matmul(&model.components.transpose())?;
    let k = projected.cols();
    let mut out = ds.with_features(projected);
    out.feature_names = Some((0..k).map(|i| format!("pc{i}")).collect());
    Ok(out)
}
