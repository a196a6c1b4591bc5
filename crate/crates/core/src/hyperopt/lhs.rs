use rand::seq::SliceRandom;
use rand::Rng as _;

use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::rng::{rng_from, Rng};

/// Latin hypercube design: each dimension's `n` coordinates fall into `n`
/// distinct equal-width strata.
pub fn lhs_sample(space: &SearchSpace, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = rng_from(seed);
    lhs_with(space, n, &mut rng)
}

pub(crate) fn lhs_with(space: &SearchSpace, n: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::arg("lhs_sample needs at least one point"));
    }
    let mut points = vec![vec![0.0; space.len()]; n];
    for (j, dim) in space.dims().iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        let width = dim.upper - dim.lower;
        for (point, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let v = dim.lower + (k as f64 + u) / n as f64 * width;
            point[j] = v.min(dim.upper);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_each_hit_once() {
        let s = SearchSpace::cube(1, 0.0, 1.0).unwrap();
        let pts = lhs_sample(&s, 4, 9).unwrap();
        let mut hits = [0; 4];
        for p in &pts {
            hits[((p[0] * 4.0) as usize).min(3)] += 1;
        }
        assert_eq!(hits, [1, 1, 1, 1]);
    }

    #[test]
    fn single_point_in_bounds() {
        let s = SearchSpace::mlp_default();
        let pts = lhs_sample(&s, 1, 2).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(s.contains(&pts[0]));
        assert!(lhs_sample(&s, 0, 2).is_err());
    }
}
