//! Post-hoc checks of the stepsize and extrapolation invariants.
//!
//! The audit recomputes every quantity from the trace and the state log
//! (`r^t`, `v^{t+1}`) without calling into the optimizer, so a corrupted trace
//! or log shows up as a violation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::StateLog;

use super::trace::RunTrace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Stop at the first violation with [`Error::InvariantViolation`].
    pub strict: bool,
    /// Absolute slack for inequalities.
    pub abs_slack: f64,
    /// Relative slack for inequalities.
    pub rel_slack: f64,
    /// Relative tolerance for one-step identities (`v` and `σ` recursions).
    pub step_rel_tol: f64,
    /// Relative tolerance for the accumulated `v` identity.
    pub cumulative_rel_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            strict: false,
            abs_slack: 1e-9,
            rel_slack: 1e-9,
            step_rel_tol: 1e-12,
            cumulative_rel_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub description: String,
    pub checked: usize,
    pub violations: usize,
    /// Smallest `allowed − observed` seen (negative beyond slack = violation).
    pub worst_margin: f64,
    pub first_violation: Option<usize>,
}

impl InvariantCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<InvariantCheck>,
    /// Largest `max(v)/min(v)` observed.
    pub kappa_observed: f64,
    /// `1 + sqrt(β/α)`.
    pub kappa_bound: f64,
    /// Largest `min(v^{t+1}) / min(v^t)` observed.
    pub growth_observed: f64,
    /// `θ(1−θ)/(κ·κ̀)` from the observed constants.
    pub sigma_lower_bound: f64,
    pub sum_dsq: f64,
    pub sum_dsq_bound: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(InvariantCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violations(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

struct Checker<'o> {
    opts: &'o AuditOptions,
    checks: Vec<InvariantCheck>,
}

impl Checker<'_> {
    fn register(&mut self, name: &str, description: &str) -> usize {
        self.checks.push(InvariantCheck {
            name: name.into(),
            description: description.into(),
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            first_violation: None,
        });
        self.checks.len() - 1
    }

    fn record(&mut self, id: usize, t: usize, margin: f64, ok: bool) -> Result<()> {
        let c = &mut self.checks[id];
        c.checked += 1;
        if margin < c.worst_margin || margin.is_nan() {
            c.worst_margin = margin;
        }
        if !ok {
            c.violations += 1;
            c.first_violation.get_or_insert(t);
            if self.opts.strict {
                return Err(Error::InvariantViolation {
                    invariant: c.name.clone(),
                    iteration: t,
                    margin,
                });
            }
        }
        Ok(())
    }

    /// `value ≤ bound` up to the inequality slack.
    fn upper(&mut self, id: usize, t: usize, value: f64, bound: f64) -> Result<()> {
        let slack = self.opts.abs_slack + self.opts.rel_slack * bound.abs().max(value.abs());
        let margin = bound - value;
        self.record(id, t, margin, margin >= -slack)
    }

    /// `|value − expected| ≤ tol·max(|value|, |expected|)`.
    fn equal(&mut self, id: usize, t: usize, value: f64, expected: f64, tol: f64) -> Result<()> {
        let diff = (value - expected).abs();
        let allowed = tol * value.abs().max(expected.abs());
        self.record(id, t, allowed - diff, diff <= allowed)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Audits an AEPG trace against its state log.
pub fn audit(trace: &RunTrace, log: Option<&StateLog>, opts: &AuditOptions) -> Result<AuditReport> {
    let log = log.ok_or_else(|| Error::AuditUnavailable("run was not recorded in audit mode (no state log)".into()))?;
    let steps = trace.iterations();
    if log.snapshots.len() != steps {
        return Err(Error::AuditUnavailable(format!(
            "state log has {} snapshots for {steps} steps",
            log.snapshots.len()
        )));
    }
    let n = log.dimension;
    if let Some(bad) = log.snapshots.iter().find(|s| s.r.len() != n || s.v_next.len() != n) {
        return Err(Error::AuditUnavailable(format!(
            "snapshot {} has the wrong dimension",
            bad.t
        )));
    }
    let (v_min, alpha, beta, theta) = (log.v_min, log.alpha, log.beta, log.theta);
    let recs = &trace.records;

    let mut ck = Checker {
        opts,
        checks: Vec::new(),
    };
    let order = ck.register(
        "trace-order",
        "t strictly increasing; wall time and gradient counters nondecreasing",
    );
    let agree = ck.register("trace-log-agreement", "trace min_v/max_v match the logged v");
    let v_rec = ck.register("v-recursion", "(v^{t+1})² = (v^t)² + α‖r^t‖² + β (r^t)²");
    let v_cum = ck.register("v-cumulative", "(v^{t+1})² = v̲² + α Σ‖r^i‖² + β Σ (r^i)²");
    let v_mono = ck.register("v-monotone", "v^{t+1} ≥ v^t coordinatewise");
    let v_env = ck.register("v-envelope", "sqrt(v̲² + αR_t) ≤ v^{t+1} ≤ sqrt(v̲² + (α+β)R_t)");
    let v_cond = ck.register("v-condition", "max(v)/min(v) ≤ 1 + sqrt(β/α)");
    let s_range = ck.register("sigma-range", "0 ≤ σ^t ≤ θ");
    let s_rec = ck.register("sigma-recursion", "σ^t = θ(1 − σ^{t−1}) min(v^t ÷ v^{t+1})");
    let s_low = ck.register("sigma-lower", "σ^t ≥ θ(1−θ)/(κ·κ̀) with observed κ, κ̀");
    let summ = ck.register("summability", "Σ_{i≤t} ‖d^i‖² ≤ (min(v^{t+1})² − v̲²)/(α v̲²)");

    let kappa_bound = 1.0 + (beta / alpha).sqrt();
    let mut v_prev = vec![v_min; n];
    let mut coord = vec![0.0; n];
    let mut r_total = 0.0;
    let mut dsq_total = 0.0;
    let mut kappa_observed: f64 = 1.0;
    let mut growth_observed: f64 = 1.0;
    let mut sum_dsq_bound = 0.0;

    ck.upper(v_cond, 0, 1.0, kappa_bound)?;
    for t in 0..steps {
        let (before, after) = (&recs[t], &recs[t + 1]);
        let snap = &log.snapshots[t];

        let ordered = after.t > before.t
            && after.wall_seconds >= before.wall_seconds
            && after.component_evals >= before.component_evals
            && after.full_evals >= before.full_evals;
        ck.record(order, t, if ordered { 0.0 } else { -1.0 }, ordered)?;

        let v = &snap.v_next;
        let (lo, hi) = min_max(v);
        let (lo_prev, _) = min_max(&v_prev);
        ck.equal(agree, t, after.min_v, lo, opts.step_rel_tol)?;
        ck.equal(agree, t, after.max_v, hi, opts.step_rel_tol)?;

        let rsq: f64 = snap.r.iter().map(|x| x * x).sum();
        r_total += rsq;
        for j in 0..n {
            let rj2 = snap.r[j] * snap.r[j];
            coord[j] += rj2;
            let step_rhs = v_prev[j] * v_prev[j] + alpha * rsq + beta * rj2;
            ck.equal(v_rec, t, v[j] * v[j], step_rhs, opts.step_rel_tol)?;
            let cum_rhs = v_min * v_min + alpha * r_total + beta * coord[j];
            ck.equal(v_cum, t, v[j] * v[j], cum_rhs, opts.cumulative_rel_tol)?;
            ck.upper(v_mono, t, v_prev[j], v[j])?;
        }
        let env_lo = (v_min * v_min + alpha * r_total).sqrt();
        let env_hi = (v_min * v_min + (alpha + beta) * r_total).sqrt();
        ck.upper(v_env, t, env_lo, lo)?;
        ck.upper(v_env, t, hi, env_hi)?;

        let kappa = hi / lo;
        kappa_observed = kappa_observed.max(kappa);
        growth_observed = growth_observed.max(lo / lo_prev);
        ck.upper(v_cond, t, kappa, kappa_bound)?;

        let sigma = after.sigma;
        let sigma_prev = before.sigma;
        ck.upper(s_range, t, sigma, theta)?;
        ck.upper(s_range, t, 0.0, sigma)?;
        let ratio = v_prev.iter().zip(v).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min);
        let expected = theta * (1.0 - sigma_prev) * ratio;
        ck.equal(s_rec, t, sigma, expected, opts.step_rel_tol)?;

        dsq_total += after.dsq;
        let bound = (lo * lo - v_min * v_min) / (alpha * v_min * v_min);
        sum_dsq_bound = bound;
        ck.upper(summ, t, dsq_total, bound)?;

        v_prev.clone_from(v);
    }

    // The lower bound uses constants observed over the whole run.
    let sigma_lower_bound = theta * (1.0 - theta) / (kappa_observed * growth_observed);
    for t in 0..steps {
        ck.upper(s_low, t, sigma_lower_bound, recs[t + 1].sigma)?;
    }

    Ok(AuditReport {
        checks: ck.checks,
        kappa_observed,
        kappa_bound,
        growth_observed,
        sigma_lower_bound,
        sum_dsq: dsq_total,
        sum_dsq_bound,
    })
}
