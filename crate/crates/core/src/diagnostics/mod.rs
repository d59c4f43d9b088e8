//! Run traces, invariant audits, empirical rate fits and method comparison.

mod audit;
mod compare;
mod rate;
mod trace;

pub use audit::{audit, AuditOptions, AuditReport, InvariantCheck};
pub use compare::{compare, Budget, RankingRow};
pub use rate::{fit_rate, fit_running_average, RateFit, MIN_RATE_ITERS};
pub use trace::{IterationRecord, RunMetadata, RunTrace, StopReason, CSV_HEADER};
