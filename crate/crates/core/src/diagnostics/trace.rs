use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the trace CSV.
pub const CSV_HEADER: &str = "t,wall_s,objective,stationarity,min_v,max_v,sigma,comp_evals,full_evals,dsq";

/// One row of a run trace. Row `t` describes the iterate after `t` steps;
/// row 0 is the starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub wall_seconds: f64,
    /// `F(x^t)`; `+inf` if the iterate is infeasible.
    pub objective: f64,
    /// Norm of the computable subgradient element at `x^t` (0 for row 0).
    pub stationarity: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// Extrapolation weight produced by the step (`θ` in row 0 for AEPG).
    pub sigma: f64,
    pub component_evals: u64,
    pub full_evals: u64,
    /// `‖x^t − x^{t−1}‖²`.
    pub dsq: f64,
}

impl IterationRecord {
    /// Gradient work in component-gradient units.
    pub fn gradient_cost(&self, num_components: usize) -> u64 {
        self.component_evals + num_components as u64 * self.full_evals
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    TimeBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub method: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub problem: String,
    pub input_hash: String,
    pub num_components: usize,
    pub dimension: usize,
    pub stop_reason: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub meta: RunMetadata,
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    /// Number of completed steps.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.wall_seconds,
                r.objective,
                r.stationarity,
                r.min_v,
                r.max_v,
                r.sigma,
                r.component_evals,
                r.full_evals,
                r.dsq
            )?;
        }
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.meta)?;
        Ok(())
    }

    /// Reads records written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(input: R, meta: RunMetadata) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(Error::EmptyInput)??;
        if header.trim() != CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header `{}`", header.trim()),
            });
        }
        let mut records = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 10 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 10 fields, found {}", fields.len()),
                });
            }
            let bad = |what: &str| Error::Parse {
                line: lineno,
                message: format!("invalid {what}"),
            };
            let float = |i: usize, what: &str| fields[i].parse::<f64>().map_err(|_| bad(what));
            records.push(IterationRecord {
                t: fields[0].parse().map_err(|_| bad("t"))?,
                wall_seconds: float(1, "wall_s")?,
                objective: float(2, "objective")?,
                stationarity: float(3, "stationarity")?,
                min_v: float(4, "min_v")?,
                max_v: float(5, "max_v")?,
                sigma: float(6, "sigma")?,
                component_evals: fields[7].parse().map_err(|_| bad("comp_evals"))?,
                full_evals: fields[8].parse().map_err(|_| bad("full_evals"))?,
                dsq: float(9, "dsq")?,
            });
        }
        Ok(Self { meta, records })
    }
}
