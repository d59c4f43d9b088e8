//! Builds problem instances from a [`ProblemSpec`].

use aepg_core::problems::{
    random_start, read_dataset, read_libsvm, DatasetMatrix, EigenvalueProblem, LibsvmOptions, PhaseRetrievalOptions,
    PhaseRetrievalProblem,
};
use aepg_core::{FiniteSumProblem, RunLimits, RunOutput};

use crate::config::{DataSource, ProblemKind, ProblemSpec, ResolvedMethod};
use crate::failure::CmdResult;

pub type Problem = Box<dyn FiniteSumProblem<f64>>;

pub const PHASE_RETRIEVAL_SHAPE: (usize, usize) = (500, 100);
pub const EIGENVALUE_SHAPE: (usize, usize) = (100, 50);
pub const EIGENVALUE_RANK: usize = 5;

pub fn load_data(spec: &ProblemSpec, seed: u64) -> CmdResult<DatasetMatrix<f64>> {
    let (rows, cols) = match spec.kind {
        ProblemKind::PhaseRetrieval => PHASE_RETRIEVAL_SHAPE,
        ProblemKind::Eigenvalue => EIGENVALUE_SHAPE,
    };
    let d = &spec.data;
    let path = || d.path.as_deref().expect("validated");
    Ok(match d.source {
        DataSource::Synthetic => DatasetMatrix::synthetic(d.rows.unwrap_or(rows), d.cols.unwrap_or(cols), seed)?,
        DataSource::File => read_dataset(path(), seed)?,
        DataSource::Libsvm => read_libsvm(
            path(),
            &LibsvmOptions {
                rows: d.rows,
                cols: d.cols,
                num_features: d.features,
                seed,
            },
        )?,
    })
}

/// The instance for one run; `spec.seed` wins over `run_seed` when set.
pub fn build_problem(spec: &ProblemSpec, run_seed: u64) -> CmdResult<Problem> {
    let seed = spec.seed.unwrap_or(run_seed);
    let data = load_data(spec, seed)?;
    Ok(match spec.kind {
        ProblemKind::PhaseRetrieval => {
            let d = PhaseRetrievalOptions::default();
            let opts = PhaseRetrievalOptions {
                sparsity: spec.sparsity.unwrap_or(d.sparsity),
                noise: spec.noise.unwrap_or(d.noise),
                seed,
                lambda: spec.lambda.unwrap_or(d.lambda),
                tau: spec.tau.unwrap_or(d.tau),
                radius: spec.radius.unwrap_or(d.radius),
            };
            Box::new(PhaseRetrievalProblem::generate(&data, &opts)?)
        }
        ProblemKind::Eigenvalue => Box::new(EigenvalueProblem::from_dataset(
            &data,
            spec.rank.unwrap_or(EIGENVALUE_RANK),
        )?),
    })
}

/// Runs `method` from the seeded random start.
pub fn execute(
    problem: &dyn FiniteSumProblem<f64>,
    method: &ResolvedMethod,
    limits: &RunLimits,
    seed: u64,
) -> aepg_core::Result<RunOutput<f64>> {
    let x0 = random_start(problem.dimension(), seed);
    match method.with_seed(seed) {
        ResolvedMethod::Aepg { config, .. } => aepg_core::run(&config, limits, problem, &x0),
        ResolvedMethod::Baseline { config, .. } => aepg_core::run_baseline(&config, limits, problem, &x0),
    }
}
