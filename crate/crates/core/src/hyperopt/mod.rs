//! Hyperparameter search: a shared box-bounded [`SearchSpace`], the
//! validation-loss fitness, and Grey Wolf, Particle Swarm and Gaussian
//! process Bayesian optimizers. All optimizers minimize.

mod bo;
mod fitness;
mod gp;
mod gwo;
mod lhs;
mod objective;
mod pso;
mod space;

pub use bo::{run_bo, run_random_search, BoConfig};
pub use fitness::{evaluate_fitness, FitnessConfig, FitnessObjective, FitnessRecord, ValidationMetrics, DIVERGENCE_PENALTY};
pub use gp::{expected_improvement, gp_fit, gp_predict, median_length_scale, GpModel, BASE_JITTER};
pub use gwo::{gwo_control, gwo_update_position, run_gwo, run_gwo_observed, GwoConfig, GwoState, GwoVariant, Wolf};
pub use lhs::lhs_sample;
pub use objective::{write_trace_csv, Objective, SearchResult, TraceRow};
pub use pso::{pso_update, pso_velocity, run_pso, run_pso_observed, PsoConfig, PsoDraws, PsoState};
pub use space::{decode, Candidate, Dim, Hyperparams, SearchSpace};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Gwo,
    Pso,
    Bo,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Gwo => "gwo",
            OptimizerKind::Pso => "pso",
            OptimizerKind::Bo => "bo",
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gwo" => Ok(OptimizerKind::Gwo),
            "pso" => Ok(OptimizerKind::Pso),
            "bo" => Ok(OptimizerKind::Bo),
            _ => Err(crate::Error::Argument(format!("unknown optimizer {s:?} (expected gwo, pso or bo)"))),
        }
    }
}

/// Budgets for all three optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct OptimizerConfig {
    pub gwo: GwoConfig,
    pub pso: PsoConfig,
    pub bo: BoConfig,
}

/// Dispatch to the selected optimizer.
pub fn run_optimizer(
    kind: OptimizerKind,
    obj: &mut dyn Objective,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<SearchResult> {
    match kind {
        OptimizerKind::Gwo => run_gwo(obj, space, &cfg.gwo, seed),
        OptimizerKind::Pso => run_pso(obj, space, &cfg.pso, seed),
        OptimizerKind::Bo => run_bo(obj, space, &cfg.bo, seed),
    }
}
