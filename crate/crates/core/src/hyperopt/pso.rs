use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::objective::{Incumbent, Objective, SearchResult};
use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::rng::{rng_at, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub n_particles: usize,
    pub n_iter: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Velocity clamp as a fraction of each dimension's width.
    pub vmax_fraction: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            n_particles: 10,
            n_iter: 10,
            inertia: 0.7,
            c1: 1.5,
            c2: 1.5,
            vmax_fraction: 0.2,
        }
    }
}

/// Unclamped velocity update for one coordinate.
#[allow(clippy::too_many_arguments)]
pub fn pso_velocity(v: f64, x: f64, p: f64, g: f64, inertia: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    inertia * v + c1 * r1 * (p - x) + c2 * r2 * (g - x)
}

#[derive(Debug, Clone)]
pub struct PsoState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<Vec<f64>>,
    pub personal_best_fitness: Vec<f64>,
    pub global_best: Vec<f64>,
    pub global_best_fitness: f64,
    pub v_max: Vec<f64>,
}

/// Per-particle, per-dimension random draws for one update.
#[derive(Debug, Clone)]
pub struct PsoDraws {
    pub r1: Vec<Vec<f64>>,
    pub r2: Vec<Vec<f64>>,
}

impl PsoState {
    /// Swarm at `positions` with the given velocities; bests are unset until
    /// the first [`PsoState::absorb`].
    pub fn new(positions: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>, v_max: Vec<f64>) -> Self {
        let n = positions.len();
        PsoState {
            personal_best: positions.clone(),
            personal_best_fitness: vec![f64::INFINITY; n],
            global_best: positions.first().cloned().unwrap_or_default(),
            global_best_fitness: f64::INFINITY,
            positions,
            velocities,
            v_max,
        }
    }

    /// Refresh personal and global bests from fitness of the current positions.
    pub fn absorb(&mut self, fitness: &[f64]) {
        for (i, &f) in fitness.iter().enumerate() {
            if f < self.personal_best_fitness[i] {
                self.personal_best_fitness[i] = f;
                self.personal_best[i] = self.positions[i].clone();
            }
        }
        for (i, &f) in self.personal_best_fitness.iter().enumerate() {
            if f < self.global_best_fitness {
                self.global_best_fitness = f;
                self.global_best = self.personal_best[i].clone();
            }
        }
    }
}

/// Velocity then position update; velocity clamped to `±v_max`, position clipped to the space.
pub fn pso_update(state: &mut PsoState, cfg: &PsoConfig, space: &SearchSpace, draws: &PsoDraws) {
    for i in 0..state.positions.len() {
        for j in 0..space.len() {
            let x = state.positions[i][j];
            let v = pso_velocity(
                state.velocities[i][j],
                x,
                state.personal_best[i][j],
                state.global_best[j],
                cfg.inertia,
                cfg.c1,
                cfg.c2,
                draws.r1[i][j],
                draws.r2[i][j],
            );
            let vm = state.v_max[j];
            let v = v.clamp(-vm, vm);
            state.velocities[i][j] = v;
            state.positions[i][j] = x + v;
        }
        space.clip(&mut state.positions[i]);
    }
}

pub fn run_pso(obj: &mut dyn Objective, space: &SearchSpace, cfg: &PsoConfig, seed: u64) -> Result<SearchResult> {
    run_pso_observed(obj, space, cfg, seed, |_| {})
}

pub fn run_pso_observed(
    obj: &mut dyn Objective,
    space: &SearchSpace,
    cfg: &PsoConfig,
    seed: u64,
    mut observe: impl FnMut(&PsoState),
) -> Result<SearchResult> {
    if cfg.n_particles < 2 {
        return Err(Error::arg(format!("PSO needs at least 2 particles, got {}", cfg.n_particles)));
    }
    if !(cfg.vmax_fraction > 0.0) {
        return Err(Error::arg("vmax_fraction must be positive"));
    }
    let mut rng = rng_at(seed, &[stream::SEARCH]);
    let v_max: Vec<f64> = space.widths().iter().map(|w| w * cfg.vmax_fraction).collect();
    let n = cfg.n_particles;
    let d = space.len();
    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for _ in 0..n {
        positions.push(
            space
                .dims()
                .iter()
                .map(|dim| rng.random_range(dim.lower..=dim.upper))
                .collect::<Vec<f64>>(),
        );
        velocities.push(v_max.iter().map(|&vm| rng.random_range(-vm..=vm)).collect::<Vec<f64>>());
    }
    let mut state = PsoState::new(positions, velocities, v_max);
    let mut inc = Incumbent::new();
    let fitness: Vec<f64> = state.positions.iter().map(|p| inc.eval(obj, p)).collect();
    state.absorb(&fitness);
    inc.record(0, None, None);
    observe(&state);

    for t in 0..cfg.n_iter {
        let mut draw = || -> Vec<Vec<f64>> { (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect() };
        let r1 = draw();
        let r2 = draw();
        pso_update(&mut state, cfg, space, &PsoDraws { r1, r2 });
        let fitness: Vec<f64> = state.positions.iter().map(|p| inc.eval(obj, p)).collect();
        state.absorb(&fitness);
        inc.record(t + 1, None, None);
        observe(&state);
    }
    Ok(inc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_velocity() {
        let v = pso_velocity(0.2, 0.0, 1.0, 2.0, 0.5, 1.0, 1.0, 1.0, 1.0);
        assert!((v - 3.1).abs() < 1e-12);
    }

    #[test]
    fn converged_swarm_is_fixed_point() {
        let space = SearchSpace::cube(2, -1.0, 1.0).unwrap();
        let p = vec![vec![0.3, -0.2]];
        let mut s = PsoState::new(p.clone(), vec![vec![0.0, 0.0]], vec![0.4, 0.4]);
        s.absorb(&[1.0]);
        let draws = PsoDraws {
            r1: vec![vec![0.9, 0.1]],
            r2: vec![vec![0.5, 0.7]],
        };
        pso_update(&mut s, &PsoConfig::default(), &space, &draws);
        assert_eq!(s.positions, p);
        assert_eq!(s.velocities, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn no_forces_freezes_position() {
        let space = SearchSpace::cube(1, -1.0, 1.0).unwrap();
        let mut s = PsoState::new(vec![vec![0.1], vec![0.5]], vec![vec![0.3], vec![-0.2]], vec![0.4]);
        s.absorb(&[2.0, 1.0]);
        let cfg = PsoConfig {
            inertia: 0.0,
            c1: 0.0,
            c2: 0.0,
            ..Default::default()
        };
        let draws = PsoDraws {
            r1: vec![vec![1.0], vec![1.0]],
            r2: vec![vec![1.0], vec![1.0]],
        };
        pso_update(&mut s, &cfg, &space, &draws);
        assert_eq!(s.positions, vec![vec![0.1], vec![0.5]]);
        assert_eq!(s.velocities, vec![vec![0.0], vec![0.0]]);
    }

    #[test]
    fn velocity_is_clamped() {
        let space = SearchSpace::cube(1, -10.0, 10.0).unwrap();
        let mut s = PsoState::new(vec![vec![0.0], vec![2.0]], vec![vec![0.2], vec![0.0]], vec![0.5]);
        s.absorb(&[3.0, 1.0]);
        let draws = PsoDraws {
            r1: vec![vec![1.0], vec![1.0]],
            r2: vec![vec![1.0], vec![1.0]],
        };
        pso_update(&mut s, &PsoConfig::default(), &space, &draws);
        assert_eq!(s.velocities[0][0], 0.5);
        assert_eq!(s.positions[0][0], 0.5);
    }

    #[test]
    fn argument_checks() {
        let s = SearchSpace::cube(1, 0.0, 1.0).unwrap();
        let cfg = PsoConfig {
            n_particles: 1,
            ..Default::default()
        };
        assert!(run_pso(&mut |_: &[f64]| 0.0, &s, &cfg, 0).is_err());
    }
}
