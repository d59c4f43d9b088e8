use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn aepg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aepg"))
        .args(args)
        .env_remove("AEPG_SEED")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_writes_normalized_dataset_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("d.bin");
    let out = aepg(&["gen", "--rows", "500", "--cols", "100", "--seed", "1", "-o", p(&d)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bytes = std::fs::read(&d).unwrap();
    assert_eq!(&bytes[..8], b"AEPGDAT1");
    assert_eq!(bytes.len(), 24 + 500 * 100 * 8);
    let side = json(&dir.path().join("d.bin.json"));
    assert_eq!(side["rows"], 500);
    assert_eq!(side["cols"], 100);
    assert!((side["frobenius_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(side["provenance"]["source"], "synthetic");
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    for path in [&a, &b] {
        assert_eq!(
            code(&aepg(&[
                "gen",
                "--rows",
                "30",
                "--cols",
                "7",
                "--seed",
                "4",
                "-o",
                p(path)
            ])),
            0
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.bin.json")).unwrap(),
        std::fs::read(dir.path().join("b.bin.json")).unwrap()
    );
}

#[test]
fn gen_rejects_empty_shape() {
    let dir = TempDir::new().unwrap();
    let out = aepg(&["gen", "--rows", "0", "-o", p(&dir.path().join("d.bin"))]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("d.bin").exists());
}

#[test]
fn gen_ingests_libsvm_and_run_reads_it() {
    let dir = TempDir::new().unwrap();
    let text = "1 1:0.5 3:-1.0\n-1 2:2.0 4:0.25\n1 1:1.0 2:1.0 3:1.0 4:1.0\n";
    let src = write(&dir, "tiny.svm", text);
    let d = dir.path().join("tiny.bin");
    let out = aepg(&["gen", "--libsvm", p(&src), "--seed", "2", "-o", p(&d)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let side = json(&dir.path().join("tiny.bin.json"));
    assert_eq!((side["rows"].as_u64(), side["cols"].as_u64()), (Some(3), Some(4)));
    assert_eq!(side["provenance"]["source"], "file");

    let run = dir.path().join("run");
    let out = aepg(&["run", "--data", p(&d), "--iters", "20", "--no-timing", "-o", p(&run)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let meta = json(&run.join("meta.json"));
    assert_eq!(meta["num_components"], 3);
    assert_eq!(meta["dimension"], 4);
}

#[test]
fn run_writes_one_row_per_iterate() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("run");
    let out = aepg(&["run", "--theta", "0.9", "--iters", "2000", "-o", p(&run)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,wall_s,objective,stationarity,min_v,max_v,sigma,comp_evals,full_evals,dsq"
    );
    assert_eq!(lines.count(), 2001);
    let meta = json(&run.join("meta.json"));
    assert_eq!(meta["method"], "aepg-spider");
    assert_eq!(meta["label"], "aepg-spider-theta0.9");
    assert_eq!(meta["effective_config"]["methods"][0]["theta"], 0.9);
    assert!(meta["input_hash"].as_str().unwrap().len() >= 16);
    assert!(run.join("solution.json").exists());
    assert!(!run.join("state_log.json").exists());
}

#[test]
fn spider_counters_follow_the_epoch_schedule() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("run");
    let iters = 100;
    let out = aepg(&[
        "run",
        "--rows",
        "529",
        "--mode",
        "spider",
        "--q",
        "23",
        "--b",
        "23",
        "--iters",
        "100",
        "--no-timing",
        "-o",
        p(&run),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    // steps t = 0..T−1 refresh when t is a multiple of q
    let refreshes = (iters as u64).div_ceil(23);
    assert_eq!(last[8].parse::<u64>().unwrap(), refreshes);
    assert_eq!(last[7].parse::<u64>().unwrap(), 23 * (iters as u64 - refreshes));
}

#[test]
fn invalid_configuration_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = aepg(&["run", "--theta", "1.0", "-o", p(&dir.path().join("r"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("theta"), "{}", stderr(&out));
    assert!(!dir.path().join("r").exists());

    let cfg = write(&dir, "bad.json", r#"{"problem": {"lamda": 0.1}}"#);
    let out = aepg(&["run", "--config", p(&cfg), "-o", p(&dir.path().join("r"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("lamda"), "{}", stderr(&out));

    let out = aepg(&["run", "--method", "newton", "-o", p(&dir.path().join("r"))]);
    assert_eq!(code(&out), 2);

    let out = aepg(&[
        "run",
        "--problem",
        "eigenvalue",
        "--rank",
        "60",
        "-o",
        p(&dir.path().join("r")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn numeric_abort_exits_3_with_dump() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r");
    let out = aepg(&[
        "run",
        "--radius",
        "1e300",
        "--v-min",
        "1e-300",
        "--iters",
        "5",
        "-o",
        p(&run),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("abort_dump.json"));
    let dump = json(&run.join("abort_dump.json"));
    assert_eq!(dump["x"].as_array().unwrap().len(), 100);
}

#[test]
fn audit_of_clean_run_passes() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r");
    assert_eq!(code(&aepg(&["run", "--iters", "300", "--audit", "-o", p(&run)])), 0);
    let out = aepg(&["check", p(&run)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("result: PASS"));
    assert!(text.contains("kappa observed"));
    assert!(!text.contains("FAIL"));

    let eig = dir.path().join("eig");
    assert_eq!(
        code(&aepg(&[
            "run",
            "--problem",
            "eigenvalue",
            "--iters",
            "300",
            "--audit",
            "-o",
            p(&eig)
        ])),
        0
    );
    assert_eq!(code(&aepg(&["check", "--strict", p(&eig)])), 0);
}

#[test]
fn injected_sigma_fails_audit() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r");
    assert_eq!(
        code(&aepg(&[
            "run",
            "--iters",
            "50",
            "--audit",
            "--no-timing",
            "-o",
            p(&run)
        ])),
        0
    );
    let path = run.join("trace.csv");
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = csv.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[21].split(',').map(String::from).collect();
    assert_eq!(fields[0], "20");
    fields[6] = "0.95".into();
    lines[21] = fields.join(",");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let out = aepg(&["check", p(&run)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL sigma-range"), "{}", stdout(&out));
    assert!(stdout(&out).contains("first_at=19"), "{}", stdout(&out));

    let out = aepg(&["check", "--strict", p(&run)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigma-range"));
}

#[test]
fn check_without_audit_data_exits_2() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r");
    assert_eq!(code(&aepg(&["run", "--iters", "10", "-o", p(&run)])), 0);
    let out = aepg(&["check", p(&run)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--audit"));
    assert_eq!(code(&aepg(&["check", p(&dir.path().join("missing"))])), 2);
}

#[test]
fn audit_flag_on_rerun_replaces_stale_log() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r");
    assert_eq!(code(&aepg(&["run", "--iters", "10", "--audit", "-o", p(&run)])), 0);
    assert_eq!(code(&aepg(&["run", "--iters", "20", "-o", p(&run)])), 0);
    assert_eq!(code(&aepg(&["check", p(&run)])), 2);
}

#[test]
fn seed_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = Command::new(env!("CARGO_BIN_EXE_aepg"))
        .args(["run", "--iters", "5", "--no-timing", "-o", p(&a)])
        .env("AEPG_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(
        code(&aepg(&[
            "run",
            "--iters",
            "5",
            "--no-timing",
            "--seed",
            "9",
            "-o",
            p(&b)
        ])),
        0
    );
    assert_eq!(json(&a.join("meta.json"))["seed"], 9);
    assert_eq!(
        std::fs::read(a.join("trace.csv")).unwrap(),
        std::fs::read(b.join("trace.csv")).unwrap()
    );
}

#[test]
fn compare_plots_one_curve_per_method() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"methods": [{"theta": 0.9}, {"kind": "proxgd"}], "seeds": [3], "budget": {"iters": 200}}"#,
    );
    let out_dir = dir.path().join("cmp");
    let out = aepg(&["compare", "--config", p(&cfg), "--jobs", "2", "-o", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(out_dir.join("curves.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">aepg-spider-theta0.9</text>"));
    assert!(svg.contains(">proxgd-spider</text>"));
    assert!(svg.contains("wall time (s)"));

    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "seed,rank,method,objective_at_cost,cost_budget,objective_at_time,time_budget,final_objective"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,1,"));
    for label in ["aepg-spider-theta0.9-seed3", "proxgd-spider-seed3"] {
        assert!(out_dir.join("runs").join(label).join("trace.csv").exists());
    }
}

#[test]
fn repeated_method_gives_identical_curves() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"problem": {"kind": "eigenvalue"}, "methods": [{"theta": 0.5}, {"theta": 0.5}], "seeds": [2, 5], "budget": {"iters": 100}}"#,
    );
    let out_dir = dir.path().join("cmp");
    let out = aepg(&["compare", "--config", p(&cfg), "--no-timing", "-o", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let runs = out_dir.join("runs");
    for seed in [2, 5] {
        let a = std::fs::read(runs.join(format!("aepg-theta0.5-seed{seed}/trace.csv"))).unwrap();
        let b = std::fs::read(runs.join(format!("aepg-theta0.5-2-seed{seed}/trace.csv"))).unwrap();
        assert_eq!(a, b);
        assert!(out_dir.join(format!("curves-seed{seed}.svg")).exists());
    }
    let svg = std::fs::read_to_string(out_dir.join("curves.svg")).unwrap();
    assert!(svg.contains(">iteration</text>"));

    let again = dir.path().join("again");
    assert_eq!(
        code(&aepg(&[
            "compare",
            "--config",
            p(&cfg),
            "--no-timing",
            "--jobs",
            "3",
            "-o",
            p(&again)
        ])),
        0
    );
    for name in ["compare.csv", "curves.svg", "config.json"] {
        assert_eq!(
            std::fs::read(out_dir.join(name)).unwrap(),
            std::fs::read(again.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn compare_needs_two_methods() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"methods": [{"theta": 0.9}]}"#);
    let out = aepg(&["compare", "--config", p(&cfg), "-o", p(&dir.path().join("cmp"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn failed_sub_run_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"problem": {"radius": 1e300}, "methods": [{"theta": 0.5}, {"kind": "subgrad_proj", "eta": 1e300}], "budget": {"iters": 20}}"#,
    );
    let out_dir = dir.path().join("cmp");
    let out = aepg(&["compare", "--config", p(&cfg), "-o", p(&out_dir)]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("subgrad-proj-spider"));
    assert!(out_dir.join("runs/subgrad-proj-spider-seed1/abort_dump.json").exists());
    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}
