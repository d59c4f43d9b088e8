//! Experiment configuration: JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use aepg_core::{AepgConfigF64, BaselineConfigF64, BaselineMethod, GradientMode};
use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProblemKind {
    #[default]
    PhaseRetrieval,
    Eigenvalue,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DataSource {
    #[default]
    Synthetic,
    File,
    Libsvm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MethodKind {
    #[default]
    Aepg,
    Proxgd,
    SubgradProj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeKind {
    Full,
    Spider,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub source: DataSource,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub path: Option<PathBuf>,
    /// Declared feature count for LIBSVM input.
    pub features: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub kind: ProblemKind,
    #[serde(default)]
    pub data: DataSpec,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub radius: Option<f64>,
    pub sparsity: Option<f64>,
    pub noise: Option<f64>,
    pub rank: Option<usize>,
    /// Instance seed; each run uses its own seed when unset.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub label: Option<String>,
    #[serde(default)]
    pub kind: MethodKind,
    pub mode: Option<ModeKind>,
    pub q: Option<usize>,
    pub b: Option<usize>,
    pub theta: Option<f64>,
    pub v_min: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub iters: Option<usize>,
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub budget: BudgetSpec,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_ITERS: usize = 1000;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{}: invalid configuration", path.display()))
    }

    /// The phase-retrieval comparison: AEPG-SPIDER at four θ plus both
    /// fixed-step baselines.
    pub fn phase_retrieval_sweep() -> Self {
        let mut methods: Vec<MethodSpec> = [0.0, 0.1, 0.5, 0.9]
            .into_iter()
            .map(|theta| MethodSpec {
                theta: Some(theta),
                ..Default::default()
            })
            .collect();
        for kind in [MethodKind::Proxgd, MethodKind::SubgradProj] {
            methods.push(MethodSpec {
                kind,
                ..Default::default()
            });
        }
        Self {
            methods,
            seeds: vec![1, 2, 3, 4],
            ..Default::default()
        }
    }

    /// The eigenvalue comparison: full-batch AEPG at three θ plus the
    /// subgradient-projection baseline.
    pub fn eigenvalue_sweep() -> Self {
        let mut methods: Vec<MethodSpec> = [0.0, 0.5, 0.9]
            .into_iter()
            .map(|theta| MethodSpec {
                theta: Some(theta),
                ..Default::default()
            })
            .collect();
        methods.push(MethodSpec {
            kind: MethodKind::SubgradProj,
            ..Default::default()
        });
        Self {
            problem: ProblemSpec {
                kind: ProblemKind::Eigenvalue,
                ..Default::default()
            },
            methods,
            seeds: vec![1, 2, 3, 4],
            ..Default::default()
        }
    }

    pub fn iters(&self) -> usize {
        self.budget.iters.unwrap_or(DEFAULT_ITERS)
    }

    /// Collects every problem with the configuration; empty when valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let p = &self.problem;
        let mut need = |cond: bool, msg: String| {
            if !cond {
                errs.push(msg);
            }
        };
        let d = &p.data;
        if let Some(r) = d.rows {
            need(r > 0, "problem.data.rows must be positive".into());
        }
        if let Some(c) = d.cols {
            need(c > 0, "problem.data.cols must be positive".into());
        }
        if let Some(f) = d.features {
            need(f > 0, "problem.data.features must be positive".into());
            need(
                d.source == DataSource::Libsvm,
                "problem.data.features applies only to libsvm input".into(),
            );
        }
        match d.source {
            DataSource::Synthetic => need(
                d.path.is_none(),
                "problem.data.path is not used with synthetic data".into(),
            ),
            DataSource::File => {
                need(d.path.is_some(), "problem.data.path is required for file input".into());
                need(
                    d.rows.is_none() && d.cols.is_none(),
                    "problem.data.rows/cols cannot resize a dataset file".into(),
                );
            }
            DataSource::Libsvm => need(
                d.path.is_some(),
                "problem.data.path is required for libsvm input".into(),
            ),
        }
        let finite_pos = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x > 0.0);
        let finite_nonneg = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x >= 0.0);
        match p.kind {
            ProblemKind::PhaseRetrieval => {
                need(finite_nonneg(p.lambda), "problem.lambda must be finite and >= 0".into());
                need(finite_pos(p.tau), "problem.tau must be finite and > 0".into());
                need(finite_pos(p.radius), "problem.radius must be finite and > 0".into());
                need(
                    p.sparsity.is_none_or(|s| s > 0.0 && s <= 1.0),
                    "problem.sparsity must lie in (0, 1]".into(),
                );
                need(finite_nonneg(p.noise), "problem.noise must be finite and >= 0".into());
                need(
                    p.rank.is_none(),
                    "problem.rank applies only to the eigenvalue problem".into(),
                );
            }
            ProblemKind::Eigenvalue => {
                for (name, set) in [
                    ("lambda", p.lambda.is_some()),
                    ("tau", p.tau.is_some()),
                    ("radius", p.radius.is_some()),
                    ("sparsity", p.sparsity.is_some()),
                    ("noise", p.noise.is_some()),
                ] {
                    need(!set, format!("problem.{name} applies only to phase retrieval"));
                }
                if let Some(r) = p.rank {
                    need(r > 0, "problem.rank must be positive".into());
                    if let Some(c) = d.cols {
                        need(r <= c, format!("problem.rank {r} exceeds the order {c}"));
                    }
                }
            }
        }

        need(
            self.budget.seconds.is_none_or(|s| s.is_finite() && s > 0.0),
            "budget.seconds must be finite and > 0".into(),
        );

        for (k, m) in self.methods.iter().enumerate() {
            let at = |field: &str| format!("methods[{k}].{field}");
            if let Some(label) = &m.label {
                need(
                    !label.is_empty()
                        && label
                            .chars()
                            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')),
                    format!("{} must be nonempty and use only [A-Za-z0-9._-]", at("label")),
                );
            }
            if let Some(t) = m.theta {
                need(
                    (0.0..1.0).contains(&t),
                    format!("{} = {t} must lie in [0, 1)", at("theta")),
                );
            }
            need(finite_pos(m.v_min), format!("{} must be finite and > 0", at("v_min")));
            need(finite_pos(m.alpha), format!("{} must be finite and > 0", at("alpha")));
            need(finite_nonneg(m.beta), format!("{} must be finite and >= 0", at("beta")));
            need(finite_pos(m.eta), format!("{} must be finite and > 0", at("eta")));
            need(m.q.is_none_or(|q| q > 0), format!("{} must be positive", at("q")));
            need(m.b.is_none_or(|b| b > 0), format!("{} must be positive", at("b")));
            if m.mode == Some(ModeKind::Full) {
                need(
                    m.q.is_none() && m.b.is_none(),
                    format!("{}: q and b apply only to spider mode", at("mode")),
                );
            }
            match m.kind {
                MethodKind::Aepg => need(m.eta.is_none(), format!("{} applies only to baselines", at("eta"))),
                _ => {
                    for (name, set) in [
                        ("theta", m.theta.is_some()),
                        ("v_min", m.v_min.is_some()),
                        ("alpha", m.alpha.is_some()),
                        ("beta", m.beta.is_some()),
                    ] {
                        need(!set, format!("{} applies only to aepg", at(name)));
                    }
                }
            }
        }
        errs
    }
}

/// A method with every default filled in, for a problem with `n` components.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedMethod {
    Aepg { label: String, config: AepgConfigF64 },
    Baseline { label: String, config: BaselineConfigF64 },
}

impl ResolvedMethod {
    pub fn label(&self) -> &str {
        match self {
            ResolvedMethod::Aepg { label, .. } | ResolvedMethod::Baseline { label, .. } => label,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut m = self.clone();
        match &mut m {
            ResolvedMethod::Aepg { config, .. } => config.seed = seed,
            ResolvedMethod::Baseline { config, .. } => config.seed = seed,
        }
        m
    }
}

fn format_number(x: f64) -> String {
    format!("{x}")
}

pub fn resolve_method(spec: &MethodSpec, kind: ProblemKind, n: usize) -> ResolvedMethod {
    let default_mode = match kind {
        ProblemKind::PhaseRetrieval => ModeKind::Spider,
        ProblemKind::Eigenvalue => ModeKind::Full,
    };
    let mode = match spec.mode.unwrap_or(default_mode) {
        ModeKind::Full => GradientMode::FullBatch,
        ModeKind::Spider => {
            let GradientMode::Spider { epoch_len, batch_size } = GradientMode::spider_sqrt(n) else {
                unreachable!()
            };
            GradientMode::Spider {
                epoch_len: spec.q.unwrap_or(epoch_len),
                batch_size: spec.b.unwrap_or(batch_size),
            }
        }
    };
    let suffix = match mode {
        GradientMode::FullBatch => "",
        GradientMode::Spider { .. } => "-spider",
    };
    match spec.kind {
        MethodKind::Aepg => {
            let theta = spec.theta.unwrap_or(0.9);
            let mut config = match kind {
                ProblemKind::PhaseRetrieval => AepgConfigF64::phase_retrieval_defaults(theta, mode),
                ProblemKind::Eigenvalue => {
                    let mut c = AepgConfigF64::eigenvalue_defaults(theta);
                    c.mode = mode;
                    c
                }
            };
            if let Some(v) = spec.v_min {
                config.v_min = v;
            }
            if let Some(a) = spec.alpha {
                config.alpha = a;
            }
            if let Some(b) = spec.beta {
                config.beta = b;
            }
            let label = spec
                .label
                .clone()
                .unwrap_or_else(|| format!("aepg{suffix}-theta{}", format_number(theta)));
            ResolvedMethod::Aepg { label, config }
        }
        MethodKind::Proxgd | MethodKind::SubgradProj => {
            let (method, name) = if spec.kind == MethodKind::Proxgd {
                (BaselineMethod::ProxGd, "proxgd")
            } else {
                (BaselineMethod::SubgradientProjection, "subgrad-proj")
            };
            let config = BaselineConfigF64 {
                method,
                step_size: spec.eta.unwrap_or(0.1),
                mode,
                seed: 0,
            };
            let label = spec.label.clone().unwrap_or_else(|| format!("{name}{suffix}"));
            ResolvedMethod::Baseline { label, config }
        }
    }
}

/// Appends `-2`, `-3`, ... to repeated labels.
pub fn dedup_labels(methods: &mut [ResolvedMethod]) {
    let mut seen: Vec<String> = Vec::new();
    for m in methods.iter_mut() {
        let base = m.label().to_string();
        let mut label = base.clone();
        let mut k = 2;
        while seen.contains(&label) {
            label = format!("{base}-{k}");
            k += 1;
        }
        match m {
            ResolvedMethod::Aepg { label: l, .. } | ResolvedMethod::Baseline { label: l, .. } => *l = label.clone(),
        }
        seen.push(label);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"problem": {"kind": "eigenvalue", "lamda": 1}}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"method": []}"#);
        assert!(err.is_err());
    }

    #[test]
    fn defaults_are_valid() {
        assert!(ExperimentConfig::default().diagnostics().is_empty());
        assert!(ExperimentConfig::phase_retrieval_sweep().diagnostics().is_empty());
        assert!(ExperimentConfig::eigenvalue_sweep().diagnostics().is_empty());
    }

    #[test]
    fn every_problem_is_reported() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"problem": {"data": {"rows": 0}}, "methods": [{"theta": 1.0, "eta": 0.1}]}"#)
                .unwrap();
        let d = cfg.diagnostics();
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d.iter().any(|m| m.contains("theta")));
    }

    #[test]
    fn spider_defaults_use_sqrt_n() {
        let m = resolve_method(&MethodSpec::default(), ProblemKind::PhaseRetrieval, 500);
        let ResolvedMethod::Aepg { label, config } = m else {
            panic!()
        };
        assert_eq!(label, "aepg-spider-theta0.9");
        assert_eq!(
            config.mode,
            GradientMode::Spider {
                epoch_len: 23,
                batch_size: 23
            }
        );
        let m = resolve_method(&MethodSpec::default(), ProblemKind::Eigenvalue, 100);
        assert_eq!(m.label(), "aepg-theta0.9");
    }

    #[test]
    fn repeated_labels_get_suffixes() {
        let spec = MethodSpec {
            kind: MethodKind::Proxgd,
            ..Default::default()
        };
        let mut ms = vec![
            resolve_method(&spec, ProblemKind::PhaseRetrieval, 4),
            resolve_method(&spec, ProblemKind::PhaseRetrieval, 4),
            resolve_method(&spec, ProblemKind::PhaseRetrieval, 4),
        ];
        dedup_labels(&mut ms);
        let labels: Vec<&str> = ms.iter().map(ResolvedMethod::label).collect();
        assert_eq!(labels, ["proxgd-spider", "proxgd-spider-2", "proxgd-spider-3"]);
    }
}
