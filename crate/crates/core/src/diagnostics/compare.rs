use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trace::{IterationRecord, RunTrace};

/// Budgets at which runs are compared. Missing values default to the
/// smallest final budget across the compared traces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// In component-gradient units.
    pub gradient_cost: Option<u64>,
    pub wall_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub method: String,
    pub seed: u64,
    /// Best objective among records within the gradient budget.
    pub objective_at_cost: f64,
    pub cost_budget: u64,
    /// Best objective among records within the wall-time budget.
    pub objective_at_time: f64,
    pub time_budget: f64,
    pub final_objective: f64,
}

fn best_within<F: Fn(&IterationRecord) -> bool>(trace: &RunTrace, within: F) -> f64 {
    trace
        .records
        .iter()
        .filter(|r| within(r))
        .map(|r| r.objective)
        .fold(f64::INFINITY, f64::min)
}

/// Ranks runs on one problem instance by objective at equal gradient cost,
/// ties broken by method name and then seed.
///
/// Traces must share an input hash.
pub fn compare(traces: &[RunTrace], budget: &Budget) -> Result<Vec<RankingRow>> {
    let first = traces.first().ok_or(Error::EmptyInput)?;
    if let Some(other) = traces.iter().find(|t| t.meta.input_hash != first.meta.input_hash) {
        return Err(Error::Comparison(format!(
            "input hash mismatch: {} ({}) vs {} ({})",
            first.meta.method, first.meta.input_hash, other.meta.method, other.meta.input_hash
        )));
    }
    if traces.iter().any(|t| t.records.is_empty()) {
        return Err(Error::Comparison("trace without records".into()));
    }
    let final_cost = |t: &RunTrace| t.last().map_or(0, |r| r.gradient_cost(t.meta.num_components));
    let final_time = |t: &RunTrace| t.last().map_or(0.0, |r| r.wall_seconds);
    let cost_budget = budget
        .gradient_cost
        .unwrap_or_else(|| traces.iter().map(final_cost).min().unwrap_or(0));
    let time_budget = budget
        .wall_seconds
        .unwrap_or_else(|| traces.iter().map(final_time).fold(f64::INFINITY, f64::min));

    let mut rows: Vec<RankingRow> = traces
        .iter()
        .map(|t| {
            let n = t.meta.num_components;
            RankingRow {
                rank: 0,
                method: t.meta.method.clone(),
                seed: t.meta.seed,
                objective_at_cost: best_within(t, |r| r.gradient_cost(n) <= cost_budget),
                cost_budget,
                objective_at_time: best_within(t, |r| r.wall_seconds <= time_budget),
                time_budget,
                final_objective: t.last().map_or(f64::NAN, |r| r.objective),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.objective_at_cost
            .partial_cmp(&b.objective_at_cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.seed.cmp(&b.seed))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(rows)
}
