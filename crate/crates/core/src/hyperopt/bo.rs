use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gp::{expected_improvement, gp_fit, gp_predict};
use super::lhs::lhs_with;
use super::objective::{Incumbent, Objective, SearchResult};
use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::rng::{rng_at, stream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub n_init: usize,
    pub n_iter: usize,
    pub n_random_candidates: usize,
    pub n_local_candidates: usize,
    /// Std of local perturbations around the incumbent, in unit-cube coordinates.
    pub local_sigma: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            n_init: 8,
            n_iter: 24,
            n_random_candidates: 1024,
            n_local_candidates: 64,
            local_sigma: 0.05,
        }
    }
}

pub fn run_bo(obj: &mut dyn Objective, space: &SearchSpace, cfg: &BoConfig, seed: u64) -> Result<SearchResult> {
    if cfg.n_init < 2 {
        return Err(Error::arg(format!("BO needs at least 2 initial points, got {}", cfg.n_init)));
    }
    if cfg.n_random_candidates + cfg.n_local_candidates == 0 {
        return Err(Error::arg("BO needs at least one acquisition candidate"));
    }
    let mut rng = rng_at(seed, &[stream::SEARCH]);
    let local = Normal::new(0.0, cfg.local_sigma).map_err(|e| Error::arg(format!("local_sigma: {e}")))?;
    let mut inc = Incumbent::new();
    let mut xs_unit: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();

    let mut observe = |inc: &mut Incumbent, xs_unit: &mut Vec<Vec<f64>>, ys: &mut Vec<f64>, x: Vec<f64>| {
        let f = inc.eval(obj, &x);
        xs_unit.push(space.to_unit(&x));
        ys.push(f);
    };

    for x in lhs_with(space, cfg.n_init, &mut rng)? {
        observe(&mut inc, &mut xs_unit, &mut ys, x);
    }
    inc.record(0, None, None);

    for t in 0..cfg.n_iter {
        let (proposal, note) = match propose(&xs_unit, &ys, space.len(), cfg, &local, &mut rng) {
            Ok(u) => (u, None),
            Err(e) => {
                let u: Vec<f64> = (0..space.len()).map(|_| rng.random::<f64>()).collect();
                (u, Some(format!("random fallback: {e}")))
            }
        };
        let mut x = space.from_unit(&proposal);
        space.clip(&mut x);
        observe(&mut inc, &mut xs_unit, &mut ys, x);
        inc.record(t + 1, None, note);
    }
    Ok(inc.finish())
}

fn propose(
    xs: &[Vec<f64>],
    ys: &[f64],
    dim: usize,
    cfg: &BoConfig,
    local: &Normal<f64>,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    // Infinite fitness (penalties, failures) would poison the surrogate; cap at the worst finite value.
    let worst = ys.iter().cloned().filter(|y| y.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() {
        return Err(Error::Numerical("no finite observations".into()));
    }
    let ys: Vec<f64> = ys.iter().map(|&y| if y.is_finite() { y } else { worst }).collect();
    let model = gp_fit(xs, &ys)?;
    let (best_idx, f_best) = ys
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, y)| if y < acc.1 { (i, y) } else { acc });
    let anchor = &xs[best_idx];

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |u: Vec<f64>| {
        let (mu, var) = gp_predict(&model, &u);
        let ei = expected_improvement(mu, var, f_best);
        if best.as_ref().is_none_or(|(b, _)| ei > *b) {
            best = Some((ei, u));
        }
    };
    for _ in 0..cfg.n_random_candidates {
        consider((0..dim).map(|_| rng.random::<f64>()).collect());
    }
    for _ in 0..cfg.n_local_candidates {
        consider(
            anchor
                .iter()
                .map(|&a| (a + local.sample(rng)).clamp(0.0, 1.0))
                .collect(),
        );
    }
    best.map(|(_, u)| u).ok_or_else(|| Error::Numerical("no acquisition candidates".into()))
}

/// Uniform random search baseline with `n_evals` evaluations.
pub fn run_random_search(obj: &mut dyn Objective, space: &SearchSpace, n_evals: usize, seed: u64) -> Result<SearchResult> {
    if n_evals == 0 {
        return Err(Error::arg("random search needs at least one evaluation"));
    }
    let mut rng = rng_at(seed, &[stream::SEARCH]);
    let mut inc = Incumbent::new();
    for i in 0..n_evals {
        let x: Vec<f64> = space
            .dims()
            .iter()
            .map(|d| rng.random_range(d.lower..=d.upper))
            .collect();
        inc.eval(obj, &x);
        inc.record(i, None, None);
    }
    Ok(inc.finish())
}
