use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{DataSource, ExperimentConfig, MethodKind, MethodSpec, ModeKind, ProblemKind};

#[derive(Debug, Parser)]
#[command(name = "aepg", version, about = "Adaptive extrapolated proximal gradient benchmarks")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or ingest a dataset into the AEPGDAT1 container.
    Gen(GenArgs),
    /// Run one method on one problem instance.
    Run(RunArgs),
    /// Run a method sweep, rank the results and plot the curves.
    Compare(CompareArgs),
    /// Audit a run made with `--audit`.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, env = "AEPG_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Read a LIBSVM text file instead of drawing a Gaussian matrix.
    #[arg(long)]
    pub libsvm: Option<PathBuf>,
    /// Declared LIBSVM feature count.
    #[arg(long, requires = "libsvm")]
    pub features: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Problem overrides shared by `run` and `compare`.
#[derive(Debug, Default, Args)]
pub struct ProblemFlags {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    /// AEPGDAT1 dataset file.
    #[arg(long, conflicts_with = "libsvm")]
    pub data: Option<PathBuf>,
    /// LIBSVM text file.
    #[arg(long)]
    pub libsvm: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Number of eigenvalues (columns of the Stiefel variable).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Seed of the problem instance; defaults to the run seed.
    #[arg(long)]
    pub instance_seed: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct MethodFlags {
    #[arg(long, value_enum)]
    pub method: Option<MethodKind>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeKind>,
    /// SPIDER epoch length.
    #[arg(long)]
    pub q: Option<usize>,
    /// SPIDER minibatch size.
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub v_min: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Baseline step size.
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct BudgetFlags {
    /// Number of iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Wall-clock budget per run in seconds.
    #[arg(long)]
    pub seconds: Option<f64>,
    /// Write zeros in the wall_s column.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub problem: ProblemFlags,
    #[command(flatten)]
    pub method: MethodFlags,
    #[command(flatten)]
    pub budget: BudgetFlags,
    #[arg(long, env = "AEPG_SEED")]
    pub seed: Option<u64>,
    /// Keep the per-step state needed by `check`.
    #[arg(long)]
    pub audit: bool,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Preset {
    /// AEPG-SPIDER at θ ∈ {0, 0.1, 0.5, 0.9} and both fixed-step baselines.
    PhaseRetrieval,
    /// Full-batch AEPG at θ ∈ {0, 0.5, 0.9} and subgradient projection.
    Eigenvalue,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub problem: ProblemFlags,
    #[command(flatten)]
    pub budget: BudgetFlags,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Comparison budget in component-gradient evaluations.
    #[arg(long)]
    pub cost_budget: Option<u64>,
    /// Comparison budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Run directory written by `aepg run --audit`.
    pub dir: PathBuf,
    /// Stop at the first violation.
    #[arg(long)]
    pub strict: bool,
}

impl ProblemFlags {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        let p = &mut cfg.problem;
        if let Some(k) = self.problem {
            p.kind = k;
        }
        if let Some(path) = &self.data {
            p.data.source = DataSource::File;
            p.data.path = Some(path.clone());
        }
        if let Some(path) = &self.libsvm {
            p.data.source = DataSource::Libsvm;
            p.data.path = Some(path.clone());
        }
        set(&mut p.data.rows, self.rows);
        set(&mut p.data.cols, self.cols);
        set(&mut p.data.features, self.features);
        set(&mut p.lambda, self.lambda);
        set(&mut p.tau, self.tau);
        set(&mut p.radius, self.radius);
        set(&mut p.sparsity, self.sparsity);
        set(&mut p.noise, self.noise);
        set(&mut p.rank, self.rank);
        set(&mut p.seed, self.instance_seed);
    }
}

impl MethodFlags {
    pub fn apply(&self, m: &mut MethodSpec) {
        if let Some(k) = self.method {
            m.kind = k;
        }
        set(&mut m.label, self.label.clone());
        set(&mut m.mode, self.mode);
        set(&mut m.q, self.q);
        set(&mut m.b, self.b);
        set(&mut m.theta, self.theta);
        set(&mut m.v_min, self.v_min);
        set(&mut m.alpha, self.alpha);
        set(&mut m.beta, self.beta);
        set(&mut m.eta, self.eta);
    }
}

impl BudgetFlags {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.budget.iters, self.iters);
        set(&mut cfg.budget.seconds, self.seconds);
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}
