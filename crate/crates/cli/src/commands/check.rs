use std::fs::File;
use std::io::BufReader;

use aepg_core::diagnostics::{audit, AuditOptions, AuditReport, RunMetadata, RunTrace};
use aepg_core::optimizer::StateLog;
use aepg_core::Error;
use anyhow::Context;

use crate::args::CheckArgs;
use crate::commands::{META_FILE, STATE_LOG_FILE, TRACE_FILE};
use crate::failure::{CmdResult, Failure};

pub fn cmd_check(a: &CheckArgs) -> CmdResult {
    let dir = &a.dir;
    for name in [TRACE_FILE, META_FILE] {
        if !dir.join(name).is_file() {
            return Err(Failure::AuditMissing(format!("{} has no {name}", dir.display())));
        }
    }
    let log_path = dir.join(STATE_LOG_FILE);
    if !log_path.is_file() {
        return Err(Failure::AuditMissing(format!(
            "{} has no {STATE_LOG_FILE}; rerun the AEPG run with --audit",
            dir.display()
        )));
    }
    let meta: RunMetadata = serde_json::from_reader(BufReader::new(File::open(dir.join(META_FILE))?))
        .with_context(|| format!("reading {}", dir.join(META_FILE).display()))?;
    let trace = RunTrace::read_csv(BufReader::new(File::open(dir.join(TRACE_FILE))?), meta)?;
    let log: StateLog = serde_json::from_reader(BufReader::new(File::open(&log_path)?))
        .with_context(|| format!("reading {}", log_path.display()))?;

    let opts = AuditOptions {
        strict: a.strict,
        ..Default::default()
    };
    println!(
        "audit of {} on {} ({} iterations)",
        trace.meta.method,
        trace.meta.problem,
        trace.iterations()
    );
    match audit(&trace, Some(&log), &opts) {
        Ok(report) => {
            print_report(&report);
            if report.passed() {
                println!("result: PASS");
                Ok(())
            } else {
                println!("result: FAIL");
                let names: Vec<&str> = report.violations().map(|c| c.name.as_str()).collect();
                Err(Failure::AuditFailed(names.join(", ")))
            }
        }
        Err(e @ Error::InvariantViolation { .. }) => {
            println!("  FAIL {e}");
            println!("result: FAIL");
            Err(Failure::AuditFailed(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn print_report(r: &AuditReport) {
    for c in &r.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "  {status} {:<20} checked={:<6} worst_margin={:+.3e}",
            c.name, c.checked, c.worst_margin
        );
        if let Some(t) = c.first_violation {
            line += &format!(" violations={} first_at={t}", c.violations);
        }
        println!("{line}  ({})", c.description);
    }
    println!(
        "  kappa observed {:.6} <= bound 1+sqrt(beta/alpha) = {:.6}",
        r.kappa_observed, r.kappa_bound
    );
    println!(
        "  growth observed {:.6}, sigma lower bound {:.6e}",
        r.growth_observed, r.sigma_lower_bound
    );
    println!(
        "  sum ||x^(t+1) - x^t||^2 = {:.6e} <= bound {:.6e}",
        r.sum_dsq, r.sum_dsq_bound
    );
}
