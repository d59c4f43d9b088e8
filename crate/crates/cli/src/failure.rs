use std::fmt;

/// A command failure, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Audit ran and found violations.
    AuditFailed(String),
    /// Invalid flags or configuration.
    Config(anyhow::Error),
    /// The run directory has no state log to audit.
    AuditMissing(String),
    NumericAbort(anyhow::Error),
    PartialSweep(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::AuditFailed(_) => 1,
            Failure::Config(_) | Failure::AuditMissing(_) => 2,
            Failure::NumericAbort(_) => 3,
            Failure::PartialSweep(_) => 4,
            Failure::Runtime(_) => 5,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(anyhow::anyhow!(msg.into()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::AuditFailed(m) => write!(f, "audit failed: {m}"),
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::AuditMissing(m) => write!(f, "audit data missing: {m}"),
            Failure::NumericAbort(e) => write!(f, "{e:#}"),
            Failure::PartialSweep(m) => write!(f, "sweep incomplete: {m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<aepg_core::Error> for Failure {
    fn from(e: aepg_core::Error) -> Self {
        use aepg_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnsupportedMetric(_) | E::Shape(_) | E::Domain(_) => Failure::Config(e.into()),
            E::AuditUnavailable(m) => Failure::AuditMissing(m),
            E::NumericAbort { .. } => Failure::NumericAbort(e.into()),
            E::InvariantViolation { .. } => Failure::AuditFailed(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;
