use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcdopt::data::LabelColumn;
use mcdopt::experiment::{DatasetSpec, ExperimentConfig, Method};
use mcdopt::hyperopt::{GwoVariant, OptimizerKind};

#[derive(Debug, Parser)]
#[command(
    name = "mcdopt",
    version,
    propagate_version = true,
    args_override_self = true,
    about = "Monte Carlo dropout classifiers with uncertainty-aware training and hyperparameter search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate a synthetic dataset as CSV.
    GenData(GenDataArgs),
    /// Run one method over several seeds and write reports.
    Run(RunArgs),
    /// Run all five methods on identical splits and write reports.
    Compare(CompareArgs),
    /// Hyperparameter search only; writes the fitness trace.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DataKind {
    Circles,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value = "circles")]
    pub kind: DataKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.8)]
    pub factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Accepted for symmetry with the other subcommands.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    Mcd,
    McdPe,
    McdGwo,
    McdBo,
    McdPso,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Mcd => Method::Mcd,
            MethodArg::McdPe => Method::McdPe,
            MethodArg::McdGwo => Method::McdGwo,
            MethodArg::McdBo => Method::McdBo,
            MethodArg::McdPso => Method::McdPso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Gwo,
    Bo,
    Pso,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> OptimizerKind {
        match o {
            OptimizerArg::Gwo => OptimizerKind::Gwo,
            OptimizerArg::Bo => OptimizerKind::Bo,
            OptimizerArg::Pso => OptimizerKind::Pso,
        }
    }
}

fn parse_dataset(s: &str) -> Result<DatasetSpec, String> {
    s.parse().map_err(|e: mcdopt::Error| e.to_string())
}

/// Options shared by every experiment-running subcommand.
#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// CSV path (`csv:<path>` or bare) or `circles[:n=..,noise=..,factor=..,seed=..]`.
    #[arg(long, value_parser = parse_dataset)]
    pub data: DatasetSpec,
    /// Label column of CSV data: zero-based index, header name, or `last`.
    #[arg(long, default_value = "last")]
    pub label_column: String,
    /// CSV data has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Keep this many principal components after standardization.
    #[arg(long)]
    pub pca: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Share of the training split used as the fitness validation fold.
    #[arg(long, default_value_t = 0.25)]
    pub fold_fraction: f64,

    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Default 0.05 for synthetic data, 0.1 for CSV data.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Weight of the predictive-entropy penalty.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dropout passes per step for the uncertainty-aware loss.
    #[arg(long)]
    pub train_mc_passes: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub eval_mc_passes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub uacc_threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub ece_bins: usize,

    /// Architecture of the non-searched methods.
    #[arg(long, default_value_t = 64)]
    pub l1: usize,
    #[arg(long, default_value_t = 16)]
    pub l2: usize,
    #[arg(long, default_value_t = 0.2)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.2)]
    pub p2: f64,

    /// Epochs per fitness evaluation.
    #[arg(long)]
    pub search_epochs: Option<usize>,
    /// Dropout passes per training step during search.
    #[arg(long)]
    pub search_mc_passes: Option<usize>,
    /// Evaluation passes per fitness evaluation.
    #[arg(long)]
    pub fitness_mc_passes: Option<usize>,
    #[arg(long)]
    pub n_agents: Option<usize>,
    #[arg(long)]
    pub n_particles: Option<usize>,
    /// Iterations for GWO and PSO.
    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long)]
    pub bo_init: Option<usize>,
    #[arg(long)]
    pub bo_iter: Option<usize>,
    /// Classical GWO update averaging the moves toward α, β and δ.
    #[arg(long)]
    pub gwo_three_leaders: bool,

    /// Worker threads; outputs do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// `dotted.key = value` file; flags given on the command line win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Number of seeds.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Step of the UAcc threshold grid on [0, 1].
    #[arg(long, default_value_t = 0.05)]
    pub threshold_step: f64,
    #[arg(long, default_value_t = 10)]
    pub pe_bins: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub threshold_step: f64,
    #[arg(long, default_value_t = 10)]
    pub pe_bins: usize,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[arg(long, value_enum)]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl ExperimentArgs {
    pub fn to_config(&self, method: Method, seeds: Vec<u64>) -> ExperimentConfig {
        let mut dataset = self.data.clone();
        if let DatasetSpec::Csv { label, has_header, .. } = &mut dataset {
            *label = self.label_column.parse::<LabelColumn>().unwrap_or(LabelColumn::Last);
            *has_header = !self.no_header;
        }
        let mut cfg = ExperimentConfig::new(dataset, method);
        cfg.seeds = seeds;
        cfg.pca_components = self.pca;
        cfg.test_fraction = self.test_fraction;
        cfg.fold_fraction = self.fold_fraction;
        cfg.eval_mc_passes = self.eval_mc_passes;
        cfg.uacc_threshold = self.uacc_threshold;
        cfg.ece_bins = self.ece_bins;
        cfg.baseline = mcdopt::hyperopt::Hyperparams {
            l1: self.l1,
            l2: self.l2,
            p1: self.p1,
            p2: self.p2,
        };
        let t = &mut cfg.train;
        let ft = &mut cfg.fitness.train;
        if let Some(v) = self.epochs {
            t.epochs = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
            ft.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            t.learning_rate = v;
            ft.learning_rate = v;
        }
        if let Some(v) = self.beta {
            t.pe_penalty_weight = v;
            ft.pe_penalty_weight = v;
        }
        if let Some(v) = self.train_mc_passes {
            t.train_mc_passes = v;
        }
        if let Some(v) = self.search_epochs {
            ft.epochs = v;
        }
        if let Some(v) = self.search_mc_passes {
            ft.train_mc_passes = v;
        }
        if let Some(v) = self.fitness_mc_passes {
            cfg.fitness.eval_mc_passes = v;
        }
        cfg.fitness.uacc_threshold = self.uacc_threshold;
        cfg.fitness.ece_bins = self.ece_bins;
        let o = &mut cfg.optimizer;
        if let Some(v) = self.n_agents {
            o.gwo.n_agents = v;
        }
        if let Some(v) = self.n_particles {
            o.pso.n_particles = v;
        }
        if let Some(v) = self.n_iter {
            o.gwo.n_iter = v;
            o.pso.n_iter = v;
        }
        if let Some(v) = self.bo_init {
            o.bo.n_init = v;
        }
        if let Some(v) = self.bo_iter {
            o.bo.n_iter = v;
        }
        if self.gwo_three_leaders {
            o.gwo.variant = GwoVariant::ThreeLeaders;
        }
        cfg
    }
}

impl SeedArgs {
    pub fn list(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.base_seed + i).collect()
    }
}
