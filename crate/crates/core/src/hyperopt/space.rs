use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::MlpConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Relaxed to continuous during search, rounded when projected.
    pub integer: bool,
}

/// Axis-aligned box of hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dims: Vec<Dim>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("search space needs at least one dimension"));
        }
        for d in &dims {
            if !(d.lower < d.upper) || !d.lower.is_finite() || !d.upper.is_finite() {
                return Err(Error::arg(format!(
                    "dimension {} has invalid bounds [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
        }
        Ok(SearchSpace { dims })
    }

    /// Continuous hypercube `[lower, upper]^dim`.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        SearchSpace::new(
            (0..dim)
                .map(|i| Dim {
                    name: format!("x{i}"),
                    lower,
                    upper,
                    integer: false,
                })
                .collect(),
        )
    }

    /// `L1 ∈ [64, 256]`, `L2 ∈ [16, 64]` (integers), `P1, P2 ∈ [0.01, 0.99]`.
    pub fn mlp_default() -> Self {
        let dim = |name: &str, lower, upper, integer| Dim {
            name: name.into(),
            lower,
            upper,
            integer,
        };
        SearchSpace {
            dims: vec![
                dim("l1", 64.0, 256.0, true),
                dim("l2", 16.0, 64.0, true),
                dim("p1", 0.01, 0.99, false),
                dim("p2", 0.01, 0.99, false),
            ],
        }
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.dims.iter().map(|d| d.name.as_str())
    }

    /// Clamp every coordinate into its bounds.
    pub fn clip(&self, x: &mut [f64]) {
        for (v, d) in x.iter_mut().zip(&self.dims) {
            *v = if v.is_nan() { d.lower } else { v.clamp(d.lower, d.upper) };
        }
    }

    /// Clip, then round integer dimensions half-up.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = x.to_vec();
        self.clip(&mut out);
        for (v, d) in out.iter_mut().zip(&self.dims) {
            if d.integer {
                *v = (*v + 0.5).floor().clamp(d.lower, d.upper);
            }
        }
        Ok(out)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.dims)
            .map(|(v, d)| (v - d.lower) / (d.upper - d.lower))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.dims)
            .map(|(v, d)| d.lower + v * (d.upper - d.lower))
            .collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.upper - d.lower).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims.len() && x.iter().zip(&self.dims).all(|(v, d)| *v >= d.lower && *v <= d.upper)
    }

    pub(crate) fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims.len() {
            return Err(Error::shape(format!(
                "point has {} coordinates, space has {} dimensions",
                x.len(),
                self.dims.len()
            )));
        }
        Ok(())
    }
}

/// Architecture hyperparameters searched over: widths and dropout rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub l1: usize,
    pub l2: usize,
    pub p1: f64,
    pub p2: f64,
}

impl Hyperparams {
    pub fn to_config(&self, input_dim: usize, num_classes: usize, init_seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim,
            l1: self.l1,
            l2: self.l2,
            num_classes,
            p1: self.p1,
            p2: self.p2,
            init_seed,
        }
    }

    /// Hashable identity of the decoded configuration.
    pub(crate) fn key(&self) -> (usize, usize, u64, u64) {
        (self.l1, self.l2, self.p1.to_bits(), self.p2.to_bits())
    }
}

/// A search point and its decoded configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: Vec<f64>,
    pub decoded: Hyperparams,
}

/// Project `lambda` into a four-dimensional `(l1, l2, p1, p2)` space.
pub fn decode(lambda: &[f64], space: &SearchSpace) -> Result<Hyperparams> {
    if space.len() != 4 {
        return Err(Error::shape("decode expects an (l1, l2, p1, p2) space"));
    }
    let v = space.project(lambda)?;
    Ok(Hyperparams {
        l1: v[0].max(1.0) as usize,
        l2: v[1].max(1.0) as usize,
        p1: v[2],
        p2: v[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_tabled_configuration() {
        let s = SearchSpace::mlp_default();
        let h = decode(&[229.4, 50.2, 0.400, 0.170], &s).unwrap();
        assert_eq!((h.l1, h.l2, h.p1, h.p2), (229, 50, 0.400, 0.170));
    }

    #[test]
    fn decode_clips_to_bounds() {
        let s = SearchSpace::mlp_default();
        let h = decode(&[1000.0, -5.0, 2.0, -1.0], &s).unwrap();
        assert_eq!((h.l1, h.l2, h.p1, h.p2), (256, 16, 0.99, 0.01));
    }

    #[test]
    fn decode_rounds_half_up() {
        let s = SearchSpace::mlp_default();
        let h = decode(&[64.49, 16.5, 0.5, 0.5], &s).unwrap();
        assert_eq!((h.l1, h.l2, h.p1, h.p2), (64, 17, 0.5, 0.5));
        assert!(decode(&[64.0, 16.0, 0.5], &s).is_err());
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(SearchSpace::cube(2, 1.0, 1.0).is_err());
        assert!(SearchSpace::cube(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn unit_round_trip() {
        let s = SearchSpace::mlp_default();
        let x = [100.0, 20.0, 0.3, 0.7];
        let back = s.from_unit(&s.to_unit(&x));
        for (a, b) in x.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
