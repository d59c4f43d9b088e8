//! Adaptive extrapolated proximal gradient with optional SPIDER variance
//! reduction, for composite problems `min (1/N) Σ f_i(x) + h(x)` with a
//! nonconvex smooth part and a nonsmooth, possibly nonconvex `h`.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below fix the element type.

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod scalar;
pub mod spider;
pub mod vector;

pub use error::{Error, Result};
pub use optimizer::{
    aepg_step, run, run_baseline, AepgConfig, BaselineConfig, BaselineMethod, GradientMode, OptimizerState, RunLimits,
    RunOutput, StateDump, StateLog,
};
pub use problems::FiniteSumProblem;
pub use prox::{ProxOperator, RegValue};
pub use scalar::Scalar;
pub use spider::{GradientCost, SpiderEstimator};
pub use vector::{DenseVector, WeightVector};

pub type DenseVectorF64 = vector::DenseVector<f64>;
pub type WeightVectorF64 = vector::WeightVector<f64>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type ProxOperatorF64 = prox::ProxOperator<f64>;
pub type DatasetMatrixF64 = problems::DatasetMatrix<f64>;
pub type PhaseRetrievalF64 = problems::PhaseRetrievalProblem<f64>;
pub type EigenvalueF64 = problems::EigenvalueProblem<f64>;
pub type AepgConfigF64 = optimizer::AepgConfig<f64>;
pub type BaselineConfigF64 = optimizer::BaselineConfig<f64>;

pub type DenseVectorF32 = vector::DenseVector<f32>;
pub type WeightVectorF32 = vector::WeightVector<f32>;
pub type ProxOperatorF32 = prox::ProxOperator<f32>;
pub type PhaseRetrievalF32 = problems::PhaseRetrievalProblem<f32>;
pub type AepgConfigF32 = optimizer::AepgConfig<f32>;
