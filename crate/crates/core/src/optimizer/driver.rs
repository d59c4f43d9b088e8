use std::time::Instant;

use crate::diagnostics::{IterationRecord, RunMetadata, RunTrace, StopReason};
use crate::error::{Error, Result};
use crate::problems::FiniteSumProblem;
use crate::prox::RegValue;
use crate::scalar::Scalar;
use crate::spider::GradientCost;
use crate::vector::DenseVector;

use super::{RunLimits, StateDump, StateLog, StateSnapshot};

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutput<T> {
    pub trace: RunTrace,
    pub solution: DenseVector<T>,
    /// Present when the run was made with `audit` enabled (AEPG only).
    pub state_log: Option<StateLog>,
}

pub(crate) struct StepRecord {
    pub sigma: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub dsq: f64,
    pub stationarity: f64,
    pub snapshot: Option<StateSnapshot>,
}

pub(crate) trait Stepper<T: Scalar, P: FiniteSumProblem<T> + ?Sized> {
    fn advance(&mut self, problem: &P, snapshot: bool) -> Result<StepRecord>;
    fn current(&self) -> &DenseVector<T>;
    fn cost(&self) -> GradientCost;
    fn dump(&self, reason: &str) -> StateDump;
}

pub(crate) fn objective_value<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &DenseVector<T>,
) -> Result<f64> {
    Ok(match problem.objective(x)? {
        RegValue::Finite(v) => v.as_f64(),
        RegValue::Infeasible => f64::INFINITY,
    })
}

pub(crate) fn drive<T, P, S>(
    mut stepper: S,
    problem: &P,
    limits: &RunLimits,
    initial: IterationRecord,
    mut meta: RunMetadata,
    mut log: Option<StateLog>,
) -> Result<RunOutput<T>>
where
    T: Scalar,
    P: FiniteSumProblem<T> + ?Sized,
    S: Stepper<T, P>,
{
    let n = problem.num_components();
    let mut records = Vec::with_capacity(limits.max_iters.min(1 << 16) + 1);
    records.push(initial);
    let start = Instant::now();
    meta.stop_reason = StopReason::MaxIters;
    log::info!("{}: {} on {}", meta.method, limits.max_iters, meta.problem);

    for t in 1..=limits.max_iters {
        let step = stepper.advance(problem, log.is_some())?;
        let objective = match objective_value(problem, stepper.current()) {
            Ok(v) => v,
            Err(Error::NonFinite { .. }) => {
                return Err(Error::NumericAbort {
                    iteration: t - 1,
                    reason: "non-finite objective".into(),
                    dump: Box::new(stepper.dump("non-finite objective")),
                })
            }
            Err(e) => return Err(e),
        };
        let cost = stepper.cost();
        let elapsed = start.elapsed().as_secs_f64();
        records.push(IterationRecord {
            t,
            wall_seconds: if limits.record_timing { elapsed } else { 0.0 },
            objective,
            stationarity: step.stationarity,
            min_v: step.min_v,
            max_v: step.max_v,
            sigma: step.sigma,
            component_evals: cost.component_evals,
            full_evals: cost.full_evals,
            dsq: step.dsq,
        });
        if let (Some(log), Some(snap)) = (log.as_mut(), step.snapshot) {
            log.snapshots.push(snap);
        }
        if t % 1000 == 0 {
            log::debug!(
                "t={t} F={objective:.6e} stat={:.3e} cost={}",
                step.stationarity,
                cost.total(n)
            );
        }
        if limits.time_budget.is_some_and(|b| elapsed >= b) {
            meta.stop_reason = StopReason::TimeBudget;
            break;
        }
    }

    Ok(RunOutput {
        trace: RunTrace { meta, records },
        solution: stepper.current().clone(),
        state_log: log,
    })
}
