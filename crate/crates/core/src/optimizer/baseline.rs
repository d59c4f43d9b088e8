use crate::diagnostics::{IterationRecord, RunMetadata, StopReason};
use crate::error::{Error, Result};
use crate::problems::{warn_if_unbounded, FiniteSumProblem};
use crate::scalar::Scalar;
use crate::spider::{GradientCost, SpiderEstimator};
use crate::vector::{DenseVector, WeightVector};

use super::aepg::residual;
use super::driver::{drive, objective_value, RunOutput, StepRecord, Stepper};
use super::{BaselineConfig, BaselineMethod, GradientMode, RunLimits, StateDump};

#[derive(Clone, Debug)]
pub struct BaselineState<T> {
    t: usize,
    x: DenseVector<T>,
    metric: WeightVector<T>,
    /// Gradient estimate and anchor point of the last step.
    last: Option<(DenseVector<T>, DenseVector<T>)>,
    estimator: SpiderEstimator<T>,
}

impl<T: Scalar> BaselineState<T> {
    pub fn new<P: FiniteSumProblem<T> + ?Sized>(
        config: &BaselineConfig<T>,
        problem: &P,
        x0: &DenseVector<T>,
    ) -> Result<Self> {
        config.validate()?;
        problem.check_point(x0)?;
        let h = problem.regularizer();
        warn_if_unbounded(h);
        let metric = WeightVector::uniform(x0.len(), T::one() / config.step_size)?;
        let x = if h.evaluate(x0).is_finite() {
            x0.clone()
        } else {
            h.prox(x0, &metric)?
        };
        Ok(Self {
            t: 0,
            x,
            metric,
            last: None,
            estimator: config.mode.estimator(config.seed)?,
        })
    }

    pub fn x(&self) -> &DenseVector<T> {
        &self.x
    }

    pub fn cost(&self) -> GradientCost {
        self.estimator.cost()
    }

    pub fn dump(&self, reason: &str) -> StateDump {
        StateDump {
            iteration: self.t,
            reason: reason.into(),
            x: self.x.to_f64_vec(),
            y: self.x.to_f64_vec(),
            v: self.metric.to_f64_vec(),
            g: self.last.as_ref().map(|(g, _)| g.to_f64_vec()),
            sigma_prev: 0.0,
        }
    }

    fn abort(&self, err: Error) -> Error {
        match err {
            Error::NonFinite { index } => {
                let reason = format!("non-finite value at coordinate {index}");
                Error::NumericAbort {
                    iteration: self.t,
                    dump: Box::new(self.dump(&reason)),
                    reason,
                }
            }
            other => other,
        }
    }
}

/// One fixed-stepsize step; returns `‖x⁺ − x‖²`.
///
/// * `ProxGd`: `x⁺ = Prox_h(x − ηg; (1/η)·1)`
/// * `SubgradientProjection`: `x⁺ = P(x − η(g + ξ))`, `ξ` a subgradient of the
///   penalty at `x` and `P` the projection onto the constraint set of `h`.
pub fn baseline_step<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut BaselineState<T>,
    config: &BaselineConfig<T>,
    problem: &P,
) -> Result<T> {
    let mut estimator = state.estimator.clone();
    let g = estimator.estimate(problem, &state.x).map_err(|e| state.abort(e))?;
    let eta = config.step_size;
    let h = problem.regularizer();
    let x_next = (|| match config.method {
        BaselineMethod::ProxGd => h.prox(&state.x.add_scaled(-eta, &g)?, &state.metric),
        BaselineMethod::SubgradientProjection => {
            let xi = h.penalty_subgradient(&state.x)?;
            let a = state.x.add_scaled(-eta, &g.add(&xi)?)?;
            h.indicator_part().prox(&a, &state.metric)
        }
    })()
    .map_err(|e| state.abort(e))?;
    let dsq = x_next.sub(&state.x)?.norm_sq();
    let x_prev = std::mem::replace(&mut state.x, x_next);
    state.last = Some((g, x_prev));
    state.estimator = estimator;
    state.t += 1;
    Ok(dsq)
}

impl<T: Scalar, P: FiniteSumProblem<T> + ?Sized> Stepper<T, P> for (BaselineState<T>, &BaselineConfig<T>) {
    fn advance(&mut self, problem: &P, _snapshot: bool) -> Result<StepRecord> {
        let (state, config) = self;
        let dsq = baseline_step(state, config, problem)?;
        let (g, anchor) = state.last.as_ref().expect("step taken");
        // For the projection baseline this is the analogous quantity, not an
        // exact subgradient element of F.
        let stationarity =
            residual(problem, &state.x, g, anchor, state.metric.as_dense()).map_err(|e| state.abort(e))?;
        let inv_eta = (T::one() / config.step_size).as_f64();
        Ok(StepRecord {
            sigma: 0.0,
            min_v: inv_eta,
            max_v: inv_eta,
            dsq: dsq.as_f64(),
            stationarity: stationarity.as_f64(),
            snapshot: None,
        })
    }

    fn current(&self) -> &DenseVector<T> {
        &self.0.x
    }

    fn cost(&self) -> GradientCost {
        self.0.cost()
    }

    fn dump(&self, reason: &str) -> StateDump {
        self.0.dump(reason)
    }
}

pub(crate) fn baseline_name(config: &BaselineConfig<impl Scalar>) -> &'static str {
    match (config.method, config.mode) {
        (BaselineMethod::ProxGd, GradientMode::Spider { .. }) => "proxgd-spider",
        (BaselineMethod::ProxGd, GradientMode::FullBatch) => "proxgd",
        (BaselineMethod::SubgradientProjection, GradientMode::Spider { .. }) => "subgrad-proj-spider",
        (BaselineMethod::SubgradientProjection, GradientMode::FullBatch) => "subgrad-proj",
    }
}

pub fn run_baseline<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    config: &BaselineConfig<T>,
    limits: &RunLimits,
    problem: &P,
    x0: &DenseVector<T>,
) -> Result<RunOutput<T>> {
    let state = BaselineState::new(config, problem, x0)?;
    let inv_eta = (T::one() / config.step_size).as_f64();
    let initial = IterationRecord {
        t: 0,
        wall_seconds: 0.0,
        objective: objective_value(problem, &state.x)?,
        stationarity: 0.0,
        min_v: inv_eta,
        max_v: inv_eta,
        sigma: 0.0,
        component_evals: 0,
        full_evals: 0,
        dsq: 0.0,
    };
    let meta = RunMetadata {
        method: baseline_name(config).into(),
        config: serde_json::to_value(config)?,
        seed: config.seed,
        problem: problem.descriptor(),
        input_hash: problem.content_hash(),
        num_components: problem.num_components(),
        dimension: problem.dimension(),
        stop_reason: StopReason::MaxIters,
    };
    drive((state, config), problem, limits, initial, meta, None)
}
