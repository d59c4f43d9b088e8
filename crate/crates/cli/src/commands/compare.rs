use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aepg_core::diagnostics::{compare, Budget, RankingRow, RunTrace};
use aepg_core::RunLimits;

use crate::args::{CompareArgs, Preset};
use crate::commands::{config_errors, create_dir, run_failure, validate_method, write_run};
use crate::config::{dedup_labels, resolve_method, ExperimentConfig, ResolvedMethod};
use crate::failure::{CmdResult, Failure};
use crate::instance::{build_problem, execute, Problem};
use crate::io::{atomic_write, write_json};
use crate::svg::convergence_plot;

pub const COMPARE_HEADER: &str =
    "seed,rank,method,objective_at_cost,cost_budget,objective_at_time,time_budget,final_objective";

struct SeedGroup {
    seed: u64,
    problem: Problem,
    methods: Vec<ResolvedMethod>,
}

struct Job {
    group: usize,
    method: usize,
    dir: PathBuf,
}

fn default_seed() -> CmdResult<u64> {
    match std::env::var("AEPG_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("AEPG_SEED={s} is not an unsigned integer"))),
        Err(_) => Ok(1),
    }
}

pub fn cmd_compare(a: &CompareArgs) -> CmdResult {
    let mut cfg = match (&a.config, a.preset) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(Failure::Config)?,
        (None, Some(Preset::PhaseRetrieval)) => ExperimentConfig::phase_retrieval_sweep(),
        (None, Some(Preset::Eigenvalue)) => ExperimentConfig::eigenvalue_sweep(),
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    a.problem.apply(&mut cfg);
    a.budget.apply(&mut cfg);
    if !a.seeds.is_empty() {
        cfg.seeds = a.seeds.clone();
    }
    if cfg.seeds.is_empty() {
        cfg.seeds = vec![default_seed()?];
    }
    let mut seen = Vec::new();
    cfg.seeds.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });
    let out_dir = a
        .output
        .clone()
        .or_else(|| cfg.output.take())
        .ok_or_else(|| Failure::config("no output directory; pass -o DIR"))?;
    cfg.output = None;
    config_errors(&cfg)?;
    if cfg.methods.len() < 2 {
        return Err(Failure::config(format!(
            "compare needs at least two methods, got {}",
            cfg.methods.len()
        )));
    }
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Failure::config("--jobs must be positive"));
    }
    if a.time_budget.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
        return Err(Failure::config("--time-budget must be finite and >= 0"));
    }

    let mut groups = Vec::new();
    for &seed in &cfg.seeds {
        let problem = build_problem(&cfg.problem, seed)?;
        let mut methods: Vec<ResolvedMethod> = cfg
            .methods
            .iter()
            .map(|m| resolve_method(m, cfg.problem.kind, problem.num_components()))
            .collect();
        dedup_labels(&mut methods);
        for m in &methods {
            validate_method(m)?;
        }
        groups.push(SeedGroup { seed, problem, methods });
    }
    let limits = RunLimits {
        max_iters: cfg.iters(),
        time_budget: cfg.budget.seconds,
        record_timing: !a.budget.no_timing,
        audit: false,
    };

    create_dir(&out_dir)?;
    write_json(&out_dir.join("config.json"), &cfg)?;
    let mut queue = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        for (k, m) in group.methods.iter().enumerate() {
            let dir = out_dir.join("runs").join(format!("{}-seed{}", m.label(), group.seed));
            create_dir(&dir)?;
            queue.push(Job {
                group: g,
                method: k,
                dir,
            });
        }
    }

    let results: Vec<Mutex<Option<Result<RunTrace, String>>>> = queue.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(queue.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = queue.get(i) else { break };
                let group = &groups[job.group];
                let method = &group.methods[job.method];
                log::info!("{} seed {}", method.label(), group.seed);
                let outcome = execute(group.problem.as_ref(), method, &limits, group.seed)
                    .map_err(|e| run_failure(&job.dir, e).to_string())
                    .and_then(|out| {
                        write_run(&job.dir, &out, &cfg, method, &limits).map_err(|e| format!("{e:#}"))?;
                        Ok(out.trace)
                    });
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut failures = Vec::new();
    let mut per_group: Vec<Vec<(String, RunTrace)>> = groups.iter().map(|_| Vec::new()).collect();
    for (job, slot) in queue.iter().zip(results) {
        let label = groups[job.group].methods[job.method].label().to_string();
        match slot.into_inner().unwrap().expect("every job ran") {
            Ok(mut trace) => {
                trace.meta.method = label.clone();
                per_group[job.group].push((label, trace));
            }
            Err(msg) => {
                eprintln!("{label} seed {}: {msg}", groups[job.group].seed);
                failures.push(format!("{label} seed {}", groups[job.group].seed));
            }
        }
    }

    let budget = Budget {
        gradient_cost: a.cost_budget,
        wall_seconds: a.time_budget,
    };
    let mut csv = format!("{COMPARE_HEADER}\n");
    let mut plotted = false;
    for (group, runs) in groups.iter().zip(&per_group) {
        if runs.is_empty() {
            continue;
        }
        let traces: Vec<RunTrace> = runs.iter().map(|(_, t)| t.clone()).collect();
        let rows = compare(&traces, &budget)?;
        print_ranking(group.seed, &rows);
        for r in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                group.seed,
                r.rank,
                r.method,
                r.objective_at_cost,
                r.cost_budget,
                r.objective_at_time,
                r.time_budget,
                r.final_objective
            );
        }
        let curves: Vec<(String, &RunTrace)> = runs.iter().map(|(l, t)| (l.clone(), t)).collect();
        let title = format!("{} (seed {})", traces[0].meta.problem, group.seed);
        let svg = convergence_plot(&title, &curves);
        if !plotted {
            atomic_write(&out_dir.join("curves.svg"), svg.as_bytes())?;
            plotted = true;
        }
        if groups.len() > 1 {
            atomic_write(&out_dir.join(format!("curves-seed{}.svg", group.seed)), svg.as_bytes())?;
        }
    }
    atomic_write(&out_dir.join("compare.csv"), csv.as_bytes())?;
    println!("wrote {}", out_dir.display());

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::PartialSweep(format!(
            "{} of {} runs failed: {}",
            failures.len(),
            queue.len(),
            failures.join(", ")
        )))
    }
}

fn print_ranking(seed: u64, rows: &[RankingRow]) {
    let Some(first) = rows.first() else { return };
    println!(
        "seed {seed}: ranking at gradient cost {} (time budget {}s)",
        first.cost_budget, first.time_budget
    );
    for r in rows {
        println!(
            "  {:>2}. {:<28} {:.12e}  final {:.12e}",
            r.rank, r.method, r.objective_at_cost, r.final_objective
        );
    }
}
