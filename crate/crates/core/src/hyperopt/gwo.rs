use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::objective::{Incumbent, Objective, SearchResult};
use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::rng::{rng_at, stream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GwoVariant {
    /// Every wolf moves relative to the alpha only.
    #[default]
    AlphaOnly,
    /// Classical grey wolf optimizer: average of the moves toward α, β and δ.
    ThreeLeaders,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwoConfig {
    pub n_agents: usize,
    pub n_iter: usize,
    pub variant: GwoVariant,
}

impl Default for GwoConfig {
    fn default() -> Self {
        GwoConfig {
            n_agents: 10,
            n_iter: 10,
            variant: GwoVariant::AlphaOnly,
        }
    }
}

/// `X_alpha − A·|C·X_alpha − X_old|` with `A = 2a·r1 − a`, `C = 2·r2`.
pub fn gwo_update_position(x_old: &[f64], x_alpha: &[f64], a: f64, r1: f64, r2: f64) -> Vec<f64> {
    x_old
        .iter()
        .zip(x_alpha)
        .map(|(&x, &xa)| gwo_step(x, xa, a, r1, r2))
        .collect()
}

fn gwo_step(x: f64, leader: f64, a: f64, r1: f64, r2: f64) -> f64 {
    let big_a = 2.0 * a * r1 - a;
    let big_c = 2.0 * r2;
    leader - big_a * (big_c * leader - x).abs()
}

/// Control scalar at update step `iter` of `n_iter`: 2 on the first step, 0 on the last.
pub fn gwo_control(iter: usize, n_iter: usize) -> f64 {
    if n_iter <= 1 {
        return 2.0;
    }
    2.0 * (1.0 - iter as f64 / (n_iter - 1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wolf {
    pub position: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone)]
pub struct GwoState {
    pub positions: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    /// Best-ever α, β, δ, ordered by fitness.
    pub leaders: [Wolf; 3],
    pub a: f64,
    pub iteration: usize,
}

impl GwoState {
    fn refresh_leaders(&mut self) {
        let mut pool: Vec<Wolf> = self.leaders.to_vec();
        pool.extend(self.positions.iter().zip(&self.fitness).map(|(p, &f)| Wolf {
            position: p.clone(),
            fitness: f,
        }));
        // Stable sort keeps incumbents ahead of equal-fitness newcomers.
        pool.sort_by(|x, y| x.fitness.total_cmp(&y.fitness));
        let mut picked: Vec<Wolf> = Vec::with_capacity(3);
        for w in &pool {
            if picked.len() == 3 {
                break;
            }
            if w.fitness.is_finite() && !picked.iter().any(|p| p.position == w.position) {
                picked.push(w.clone());
            }
        }
        // Degenerate populations (all identical): repeat the best.
        let fallback = pool[0].clone();
        while picked.len() < 3 {
            picked.push(picked.last().cloned().unwrap_or_else(|| fallback.clone()));
        }
        self.leaders = [picked[0].clone(), picked[1].clone(), picked[2].clone()];
    }
}

fn uniform_point(space: &SearchSpace, rng: &mut Rng) -> Vec<f64> {
    space
        .dims()
        .iter()
        .map(|d| rng.random_range(d.lower..=d.upper))
        .collect()
}

pub fn run_gwo(obj: &mut dyn Objective, space: &SearchSpace, cfg: &GwoConfig, seed: u64) -> Result<SearchResult> {
    run_gwo_observed(obj, space, cfg, seed, |_| {})
}

/// As [`run_gwo`], calling `observe` with the state after initialization and after every step.
pub fn run_gwo_observed(
    obj: &mut dyn Objective,
    space: &SearchSpace,
    cfg: &GwoConfig,
    seed: u64,
    mut observe: impl FnMut(&GwoState),
) -> Result<SearchResult> {
    if cfg.n_agents < 3 {
        return Err(Error::arg(format!("GWO needs at least 3 agents, got {}", cfg.n_agents)));
    }
    let mut rng = rng_at(seed, &[stream::SEARCH]);
    let mut inc = Incumbent::new();
    let positions: Vec<Vec<f64>> = (0..cfg.n_agents).map(|_| uniform_point(space, &mut rng)).collect();
    let fitness: Vec<f64> = positions.iter().map(|p| inc.eval(obj, p)).collect();
    let placeholder = Wolf {
        position: positions[0].clone(),
        fitness: f64::INFINITY,
    };
    let mut state = GwoState {
        positions,
        fitness,
        leaders: [placeholder.clone(), placeholder.clone(), placeholder],
        a: gwo_control(0, cfg.n_iter),
        iteration: 0,
    };
    state.refresh_leaders();
    inc.record(0, None, None);
    observe(&state);

    for t in 0..cfg.n_iter {
        let a = gwo_control(t, cfg.n_iter);
        state.a = a;
        for i in 0..cfg.n_agents {
            let mut next = Vec::with_capacity(space.len());
            for j in 0..space.len() {
                let x = state.positions[i][j];
                let v = match cfg.variant {
                    GwoVariant::AlphaOnly => {
                        let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
                        gwo_step(x, state.leaders[0].position[j], a, r1, r2)
                    }
                    GwoVariant::ThreeLeaders => {
                        let mut sum = 0.0;
                        for leader in &state.leaders {
                            let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
                            sum += gwo_step(x, leader.position[j], a, r1, r2);
                        }
                        sum / 3.0
                    }
                };
                next.push(v);
            }
            space.clip(&mut next);
            state.positions[i] = next;
        }
        for i in 0..cfg.n_agents {
            state.fitness[i] = inc.eval(obj, &state.positions[i]);
        }
        state.iteration = t + 1;
        state.refresh_leaders();
        inc.record(t + 1, Some(a), None);
        observe(&state);
    }
    Ok(inc.finish())
}
