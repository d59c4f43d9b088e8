//! Adaptive extrapolated proximal gradient (AEPG), its SPIDER variant, and two
//! fixed-stepsize baselines.

mod aepg;
mod baseline;
mod driver;

pub use aepg::{aepg_step, run, stationarity_residual, OptimizerState, StepSummary};
pub use baseline::{baseline_step, run_baseline, BaselineState};
pub use driver::RunOutput;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spider::SpiderEstimator;

/// Where the gradient estimate comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Exact full gradient every iteration.
    FullBatch,
    /// SPIDER with full refresh every `epoch_len` iterations and minibatches of `batch_size`.
    Spider { epoch_len: usize, batch_size: usize },
}

impl GradientMode {
    /// SPIDER with `q = b = ⌈√N⌉`.
    pub fn spider_sqrt(num_components: usize) -> Self {
        let q = (num_components as f64).sqrt().ceil().max(1.0) as usize;
        GradientMode::Spider {
            epoch_len: q,
            batch_size: q,
        }
    }

    pub(crate) fn estimator<T: Scalar>(&self, seed: u64) -> Result<SpiderEstimator<T>> {
        match *self {
            GradientMode::FullBatch => Ok(SpiderEstimator::full_batch()),
            GradientMode::Spider { epoch_len, batch_size } => SpiderEstimator::new(epoch_len, batch_size, seed),
        }
    }
}

/// Iteration and wall-time limits shared by all methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLimits {
    /// Number of iterations (loop bodies) to execute.
    pub max_iters: usize,
    /// Stop after the iteration during which this many seconds elapsed.
    pub time_budget: Option<f64>,
    /// Record wall time; when false the `wall_s` column is zero.
    pub record_timing: bool,
    /// Keep per-iteration state snapshots for auditing.
    pub audit: bool,
}

impl Default for RunLimits {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            time_budget: None,
            record_timing: true,
            audit: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AepgConfig<T> {
    /// Initial stepsize factor `v̲ > 0` (`v^0 = v̲·1`).
    pub v_min: T,
    /// Global rate multiplier `α > 0`.
    pub alpha: T,
    /// Coordinate-wise multiplier `β ≥ 0`.
    pub beta: T,
    /// Extrapolation parameter `θ ∈ [0, 1)`.
    pub theta: T,
    pub mode: GradientMode,
    pub seed: u64,
}

impl<T: Scalar> AepgConfig<T> {
    /// `(v̲, α, β) = (0.05, 0.01, 1)`, the sparse phase retrieval setting.
    pub fn phase_retrieval_defaults(theta: f64, mode: GradientMode) -> Self {
        Self {
            v_min: T::cast(0.05),
            alpha: T::cast(0.01),
            beta: T::one(),
            theta: T::cast(theta),
            mode,
            seed: 0,
        }
    }

    /// `(v̲, α, β) = (0.001, 0.001, 0)`, the eigenvalue setting (uniform metric).
    pub fn eigenvalue_defaults(theta: f64) -> Self {
        Self {
            v_min: T::cast(0.001),
            alpha: T::cast(0.001),
            beta: T::zero(),
            theta: T::cast(theta),
            mode: GradientMode::FullBatch,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParameter(msg.into()))
            }
        };
        ok(self.v_min.is_finite() && self.v_min > T::zero(), "v_min must be > 0")?;
        ok(self.alpha.is_finite() && self.alpha > T::zero(), "alpha must be > 0")?;
        ok(self.beta.is_finite() && self.beta >= T::zero(), "beta must be >= 0")?;
        ok(
            self.theta >= T::zero() && self.theta < T::one(),
            "theta must lie in [0, 1)",
        )?;
        validate_mode(&self.mode)
    }
}

fn validate_mode(mode: &GradientMode) -> Result<()> {
    if let GradientMode::Spider { epoch_len, batch_size } = *mode {
        if epoch_len == 0 || batch_size == 0 {
            return Err(Error::InvalidParameter(
                "SPIDER epoch length and batch size must be positive".into(),
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    /// `x⁺ = Prox_h(x − ηg; (1/η)·1)`.
    ProxGd,
    /// `x⁺ = P(x − η(g + ξ))` with `ξ` a subgradient of the penalty and `P`
    /// the projection onto the constraint set.
    SubgradientProjection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig<T> {
    pub method: BaselineMethod,
    /// Fixed stepsize `η > 0`.
    pub step_size: T,
    pub mode: GradientMode,
    pub seed: u64,
}

impl<T: Scalar> BaselineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > T::zero()) {
            return Err(Error::InvalidParameter("step size must be > 0".into()));
        }
        validate_mode(&self.mode)
    }
}

/// State captured when a run aborts on a non-finite value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub iteration: usize,
    pub reason: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub g: Option<Vec<f64>>,
    pub sigma_prev: f64,
}

/// Per-iteration quantities retained in audit mode: `r^t = v^t ⊙ d^t` and
/// `v^{t+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub t: usize,
    pub r: Vec<f64>,
    pub v_next: Vec<f64>,
}

/// Snapshots of an AEPG run plus the parameters needed to audit them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateLog {
    pub v_min: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub dimension: usize,
    pub snapshots: Vec<StateSnapshot>,
}
