use aepg_core::RunLimits;

use crate::args::RunArgs;
use crate::commands::{config_errors, create_dir, run_failure, validate_method, write_run};
use crate::config::{resolve_method, ExperimentConfig, ResolvedMethod};
use crate::failure::{CmdResult, Failure};
use crate::instance::{build_problem, execute};

pub fn cmd_run(a: &RunArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).map_err(Failure::Config)?,
        None => ExperimentConfig::default(),
    };
    a.problem.apply(&mut cfg);
    a.budget.apply(&mut cfg);
    if cfg.methods.len() > 1 {
        return Err(Failure::config(format!(
            "run takes one method, the configuration lists {}; use `compare` for sweeps",
            cfg.methods.len()
        )));
    }
    let mut spec = cfg.methods.pop().unwrap_or_default();
    a.method.apply(&mut spec);
    cfg.methods = vec![spec];

    let seed = match (a.seed, cfg.seeds.as_slice()) {
        (Some(s), _) => s,
        (None, []) => 1,
        (None, [s]) => *s,
        (None, many) => {
            return Err(Failure::config(format!(
                "run takes one seed, the configuration lists {}; pass --seed",
                many.len()
            )))
        }
    };
    cfg.seeds = vec![seed];
    let dir = a
        .output
        .clone()
        .or_else(|| cfg.output.take())
        .ok_or_else(|| Failure::config("no output directory; pass -o DIR"))?;
    cfg.output = None;
    config_errors(&cfg)?;

    let problem = build_problem(&cfg.problem, seed)?;
    let method = resolve_method(&cfg.methods[0], cfg.problem.kind, problem.num_components());
    validate_method(&method)?;
    if a.audit && matches!(method, ResolvedMethod::Baseline { .. }) {
        log::warn!(
            "--audit applies to AEPG runs only; no state log is written for {}",
            method.label()
        );
    }
    let limits = RunLimits {
        max_iters: cfg.iters(),
        time_budget: cfg.budget.seconds,
        record_timing: !a.budget.no_timing,
        audit: a.audit,
    };

    create_dir(&dir)?;
    let out = execute(problem.as_ref(), &method, &limits, seed).map_err(|e| run_failure(&dir, e))?;
    write_run(&dir, &out, &cfg, &method, &limits)?;
    let last = out.trace.last().expect("trace has the initial record");
    println!(
        "{} on {}: {} iterations, objective {:e}, stationarity {:e}, gradient cost {}",
        method.label(),
        out.trace.meta.problem,
        out.trace.iterations(),
        last.objective,
        last.stationarity,
        last.gradient_cost(out.trace.meta.num_components)
    );
    println!("wrote {}", dir.display());
    Ok(())
}
