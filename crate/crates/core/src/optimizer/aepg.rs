use crate::diagnostics::{IterationRecord, RunMetadata, StopReason};
use crate::error::{Error, Result};
use crate::problems::{warn_if_unbounded, FiniteSumProblem};
use crate::scalar::Scalar;
use crate::spider::{GradientCost, SpiderEstimator};
use crate::vector::{min_ratio, DenseVector, WeightVector};

use super::driver::{drive, objective_value, RunOutput, StepRecord, Stepper};
use super::{AepgConfig, GradientMode, RunLimits, StateDump, StateLog, StateSnapshot};

/// Inputs of the most recent step, kept for the stationarity residual.
#[derive(Clone, Debug)]
struct LastStep<T> {
    g: DenseVector<T>,
    y: DenseVector<T>,
    v: WeightVector<T>,
}

/// Iteration state. Before step `t` it holds `x^t`, `y^t`, `v^t` and `σ^{t−1}`.
#[derive(Clone, Debug)]
pub struct OptimizerState<T> {
    t: usize,
    x: DenseVector<T>,
    y: DenseVector<T>,
    v: WeightVector<T>,
    sigma_prev: T,
    last: Option<LastStep<T>>,
    estimator: SpiderEstimator<T>,
}

/// What one step produced.
#[derive(Clone, Debug)]
pub struct StepSummary<T> {
    /// Index of the step just taken.
    pub t: usize,
    pub sigma: T,
    /// `r^t = v^t ⊙ (x^{t+1} − x^t)`.
    pub r: DenseVector<T>,
    pub dsq: T,
}

impl<T: Scalar> OptimizerState<T> {
    /// `x^{-1} = x^0`, `y^0 = x^0`, `v^0 = v̲·1`, `σ^{-1} = θ`.
    ///
    /// An infeasible `x^0` is first mapped through the prox with metric `v̲·1`.
    pub fn new<P: FiniteSumProblem<T> + ?Sized>(
        config: &AepgConfig<T>,
        problem: &P,
        x0: &DenseVector<T>,
    ) -> Result<Self> {
        config.validate()?;
        problem.check_point(x0)?;
        let h = problem.regularizer();
        warn_if_unbounded(h);
        let v = WeightVector::uniform(x0.len(), config.v_min)?;
        let x = if h.evaluate(x0).is_finite() {
            x0.clone()
        } else {
            log::info!("initial point is infeasible; projecting");
            h.prox(x0, &v)?
        };
        Ok(Self {
            t: 0,
            y: x.clone(),
            x,
            v,
            sigma_prev: config.theta,
            last: None,
            estimator: config.mode.estimator(config.seed)?,
        })
    }

    pub fn with_estimator(mut self, estimator: SpiderEstimator<T>) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &DenseVector<T> {
        &self.x
    }

    pub fn y(&self) -> &DenseVector<T> {
        &self.y
    }

    pub fn v(&self) -> &WeightVector<T> {
        &self.v
    }

    pub fn sigma_prev(&self) -> T {
        self.sigma_prev
    }

    pub fn cost(&self) -> GradientCost {
        self.estimator.cost()
    }

    pub fn estimator(&self) -> &SpiderEstimator<T> {
        &self.estimator
    }

    /// Gradient estimate used by the most recent step.
    pub fn last_gradient(&self) -> Option<&DenseVector<T>> {
        self.last.as_ref().map(|l| &l.g)
    }

    pub fn dump(&self, reason: &str) -> StateDump {
        StateDump {
            iteration: self.t,
            reason: reason.into(),
            x: self.x.to_f64_vec(),
            y: self.y.to_f64_vec(),
            v: self.v.to_f64_vec(),
            g: self.last.as_ref().map(|l| l.g.to_f64_vec()),
            sigma_prev: self.sigma_prev.as_f64(),
        }
    }
}

fn abort<T: Scalar>(state: &OptimizerState<T>, err: Error) -> Error {
    match err {
        Error::NonFinite { index } => {
            let reason = format!("non-finite value at coordinate {index}");
            Error::NumericAbort {
                iteration: state.t,
                dump: Box::new(state.dump(&reason)),
                reason,
            }
        }
        other => other,
    }
}

/// One AEPG iteration:
///
/// ```text
/// x^{t+1} = Prox_h(y^t − g^t ÷ v^t; v^t)
/// r^t     = v^t ⊙ (x^{t+1} − x^t)
/// v^{t+1} = sqrt(v^t ⊙ v^t + α‖r^t‖²·1 + β r^t ⊙ r^t)
/// σ^t     = θ (1 − σ^{t−1}) min(v^t ÷ v^{t+1})
/// y^{t+1} = x^{t+1} + σ^t (x^{t+1} − x^t)
/// ```
///
/// A non-finite intermediate aborts with [`Error::NumericAbort`]; the state is
/// left at the start of the failed step.
pub fn aepg_step<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut OptimizerState<T>,
    config: &AepgConfig<T>,
    problem: &P,
) -> Result<StepSummary<T>> {
    let mut estimator = state.estimator.clone();
    let g = estimator.estimate(problem, &state.y).map_err(|e| abort(state, e))?;
    let computed = (|| {
        let a = state.y.sub(&g.div(state.v.as_dense())?)?;
        let x_next = problem.regularizer().prox(&a, &state.v)?;
        let d = x_next.sub(&state.x)?;
        let r = state.v.as_dense().mul(&d)?;
        let rsq = r.norm_sq();
        let v_next = WeightVector::new(
            state
                .v
                .as_slice()
                .iter()
                .zip(r.iter())
                .map(|(&vj, &rj)| (vj * vj + config.alpha * rsq + config.beta * rj * rj).sqrt())
                .collect(),
        )
        .map_err(|_| Error::NonFinite { index: 0 })?;
        let sigma = config.theta * (T::one() - state.sigma_prev) * min_ratio(&state.v, &v_next)?;
        let y_next = x_next.add_scaled(sigma, &d)?;
        Ok((x_next, d, r, v_next, sigma, y_next))
    })();
    let (x_next, d, r, v_next, sigma, y_next) = computed.map_err(|e| abort(state, e))?;

    let t = state.t;
    let y_prev = std::mem::replace(&mut state.y, y_next);
    let v_prev = std::mem::replace(&mut state.v, v_next);
    state.last = Some(LastStep {
        g,
        y: y_prev,
        v: v_prev,
    });
    state.x = x_next;
    state.sigma_prev = sigma;
    state.estimator = estimator;
    state.t += 1;
    Ok(StepSummary {
        t,
        sigma,
        dsq: d.norm_sq(),
        r,
    })
}

/// `‖∇f(x^{t+1}) − g^t − v^t ⊙ (x^{t+1} − y^t)‖` for the last step taken,
/// the norm of an element of `∂F(x^{t+1})` (exact gradient, not counted as work).
pub fn stationarity_residual<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &OptimizerState<T>,
    problem: &P,
) -> Result<T> {
    let last = state
        .last
        .as_ref()
        .ok_or_else(|| Error::Domain("no step has been taken".into()))?;
    residual(problem, &state.x, &last.g, &last.y, last.v.as_dense())
}

pub(crate) fn residual<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &DenseVector<T>,
    g: &DenseVector<T>,
    anchor: &DenseVector<T>,
    v: &DenseVector<T>,
) -> Result<T> {
    let grad = problem.full_gradient(x)?;
    let moved = v.mul(&x.sub(anchor)?)?;
    Ok(grad.sub(g)?.sub(&moved)?.norm())
}

struct AepgStepper<'c, T> {
    state: OptimizerState<T>,
    config: &'c AepgConfig<T>,
}

impl<T: Scalar, P: FiniteSumProblem<T> + ?Sized> Stepper<T, P> for AepgStepper<'_, T> {
    fn advance(&mut self, problem: &P, snapshot: bool) -> Result<StepRecord> {
        let step = aepg_step(&mut self.state, self.config, problem)?;
        let stationarity = stationarity_residual(&self.state, problem).map_err(|e| abort(&self.state, e))?;
        let v = &self.state.v;
        Ok(StepRecord {
            sigma: step.sigma.as_f64(),
            min_v: v.min().as_f64(),
            max_v: v.max().as_f64(),
            dsq: step.dsq.as_f64(),
            stationarity: stationarity.as_f64(),
            snapshot: snapshot.then(|| StateSnapshot {
                t: step.t,
                r: step.r.to_f64_vec(),
                v_next: v.to_f64_vec(),
            }),
        })
    }

    fn current(&self) -> &DenseVector<T> {
        &self.state.x
    }

    fn cost(&self) -> GradientCost {
        self.state.cost()
    }

    fn dump(&self, reason: &str) -> StateDump {
        self.state.dump(reason)
    }
}

pub(crate) fn method_name(mode: &GradientMode) -> &'static str {
    match mode {
        GradientMode::FullBatch => "aepg",
        GradientMode::Spider { .. } => "aepg-spider",
    }
}

/// Runs AEPG (or AEPG-SPIDER) from `x0` and records one trace row per step.
pub fn run<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    config: &AepgConfig<T>,
    limits: &RunLimits,
    problem: &P,
    x0: &DenseVector<T>,
) -> Result<RunOutput<T>> {
    let state = OptimizerState::new(config, problem, x0)?;
    let v0 = config.v_min.as_f64();
    let initial = IterationRecord {
        t: 0,
        wall_seconds: 0.0,
        objective: objective_value(problem, &state.x)?,
        stationarity: 0.0,
        min_v: v0,
        max_v: v0,
        sigma: config.theta.as_f64(),
        component_evals: 0,
        full_evals: 0,
        dsq: 0.0,
    };
    let meta = RunMetadata {
        method: method_name(&config.mode).into(),
        config: serde_json::to_value(config)?,
        seed: config.seed,
        problem: problem.descriptor(),
        input_hash: problem.content_hash(),
        num_components: problem.num_components(),
        dimension: problem.dimension(),
        stop_reason: StopReason::MaxIters,
    };
    let log = limits.audit.then(|| StateLog {
        v_min: v0,
        alpha: config.alpha.as_f64(),
        beta: config.beta.as_f64(),
        theta: config.theta.as_f64(),
        dimension: problem.dimension(),
        snapshots: Vec::with_capacity(limits.max_iters.min(1 << 16)),
    });
    drive(AepgStepper { state, config }, problem, limits, initial, meta, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problems::EigenvalueProblem;
    use crate::prox::ProxOperator;

    /// `f(x) = ½‖x − c‖²` as a one-component problem.
    struct Quadratic {
        center: Vec<f64>,
        h: ProxOperator<f64>,
    }

    impl FiniteSumProblem<f64> for Quadratic {
        fn dimension(&self) -> usize {
            self.center.len()
        }
        fn num_components(&self) -> usize {
            1
        }
        fn accumulate_component_gradient(&self, _i: usize, x: &[f64], w: f64, out: &mut [f64]) {
            for ((o, xi), ci) in out.iter_mut().zip(x).zip(&self.center) {
                *o += w * (xi - ci);
            }
        }
        fn smooth_value(&self, x: &[f64]) -> f64 {
            0.5 * x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
        fn regularizer(&self) -> &ProxOperator<f64> {
            &self.h
        }
        fn descriptor(&self) -> String {
            "quadratic".into()
        }
        fn content_hash(&self) -> String {
            "q".into()
        }
    }

    fn config(theta: f64) -> AepgConfig<f64> {
        AepgConfig {
            v_min: 0.5,
            alpha: 0.1,
            beta: 1.0,
            theta,
            mode: GradientMode::FullBatch,
            seed: 0,
        }
    }

    #[test]
    fn first_step_by_hand() {
        let p = Quadratic {
            center: vec![1.0, -2.0],
            h: ProxOperator::Zero,
        };
        let cfg = config(0.5);
        let x0 = DenseVector::new(vec![0.0, 0.0]).unwrap();
        let mut s = OptimizerState::new(&cfg, &p, &x0).unwrap();
        let step = aepg_step(&mut s, &cfg, &p).unwrap();
        // g = x0 - c = (-1, 2); x1 = y0 - g / 0.5 = (2, -4)
        assert_eq!(s.x().as_slice(), &[2.0, -4.0]);
        // r = 0.5 * d = (1, -2), ‖r‖² = 5
        assert_eq!(step.r.as_slice(), &[1.0, -2.0]);
        let v1 = [(0.25_f64 + 0.5 + 1.0).sqrt(), (0.25_f64 + 0.5 + 4.0).sqrt()];
        assert_eq!(s.v().as_slice(), &v1);
        let sigma = 0.5 * (1.0 - 0.5) * (0.5 / v1[1]);
        assert_eq!(step.sigma, sigma);
        assert_eq!(s.y().as_slice(), &[2.0 + sigma * 2.0, -4.0 - sigma * 4.0]);
        // ∇f(x1) - g - v0 (x1 - y0) = (1, -2) - (-1, 2) - (1, -2) = (1, -2)
        let res = stationarity_residual(&s, &p).unwrap();
        assert!((res - 5.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn theta_zero_never_extrapolates() {
        let p = Quadratic {
            center: vec![3.0, 1.0, -1.0],
            h: ProxOperator::boxed(2.0).unwrap(),
        };
        let cfg = config(0.0);
        let out = run(
            &cfg,
            &RunLimits {
                max_iters: 20,
                ..Default::default()
            },
            &p,
            &DenseVector::zeros(3),
        )
        .unwrap();
        assert!(out.trace.records.iter().all(|r| r.sigma == 0.0));
        assert!(out.solution.iter().all(|x| x.abs() <= 2.0));
    }

    #[test]
    fn zero_iterations_gives_initial_record() {
        let p = Quadratic {
            center: vec![1.0],
            h: ProxOperator::Zero,
        };
        let out = run(
            &config(0.3),
            &RunLimits {
                max_iters: 0,
                ..Default::default()
            },
            &p,
            &DenseVector::new(vec![4.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(out.trace.records.len(), 1);
        let r = &out.trace.records[0];
        assert_eq!((r.objective, r.min_v, r.sigma), (4.5, 0.5, 0.3));
        assert_eq!(out.solution.as_slice(), &[4.0]);
    }

    #[test]
    fn infeasible_start_is_projected() {
        let p = Quadratic {
            center: vec![0.0, 0.0],
            h: ProxOperator::boxed(1.0).unwrap(),
        };
        let s = OptimizerState::new(&config(0.1), &p, &DenseVector::new(vec![5.0, -0.5]).unwrap()).unwrap();
        assert_eq!(s.x().as_slice(), &[1.0, -0.5]);
        assert_eq!(s.y(), s.x());
    }

    #[test]
    fn non_uniform_metric_on_stiefel_is_rejected() {
        let c = Matrix::from_row_major(2, 2, vec![-2.0, 0.5, 0.5, -1.0]).unwrap();
        let p = EigenvalueProblem::new(c, 1).unwrap();
        let mut cfg = config(0.1);
        cfg.beta = 1.0;
        let x0 = DenseVector::new(vec![1.0, 0.0]).unwrap();
        let mut s = OptimizerState::new(&cfg, &p, &x0).unwrap();
        // first step uses v0 = v̲·1, then β > 0 makes v non-uniform
        let mut err = None;
        for _ in 0..5 {
            if let Err(e) = aepg_step(&mut s, &cfg, &p) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(Error::UnsupportedMetric(_))));
    }

    #[test]
    fn overflow_aborts_with_dump() {
        let p = Quadratic {
            center: vec![1e150, -1e150],
            h: ProxOperator::Zero,
        };
        let cfg = AepgConfig {
            v_min: 1e-300,
            ..config(0.5)
        };
        let err = run(&cfg, &RunLimits::default(), &p, &DenseVector::zeros(2)).unwrap_err();
        match err {
            Error::NumericAbort { iteration, dump, .. } => {
                assert_eq!(iteration, 0);
                assert_eq!(dump.x, vec![0.0, 0.0]);
                assert_eq!(dump.v, vec![1e-300, 1e-300]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = Quadratic {
            center: vec![0.0],
            h: ProxOperator::Zero,
        };
        for cfg in [
            AepgConfig {
                theta: 1.0,
                ..config(0.0)
            },
            AepgConfig {
                alpha: 0.0,
                ..config(0.0)
            },
            AepgConfig {
                v_min: -1.0,
                ..config(0.0)
            },
            AepgConfig {
                beta: -0.1,
                ..config(0.0)
            },
        ] {
            assert!(matches!(
                OptimizerState::new(&cfg, &p, &DenseVector::zeros(1)),
                Err(Error::InvalidParameter(_))
            ));
        }
    }
}
