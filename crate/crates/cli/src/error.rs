use std::fmt;

use swe_core::executor::{RunError, StepError};
use swe_core::io::ConfigError;
use swe_core::scenarios::ScenarioError;

/// Failure class. Each maps to a fixed exit code and a stable prefix tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Config,
    Instability,
    StepCollapse,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Config => 2,
            ErrorKind::Instability => 3,
            ErrorKind::StepCollapse => 4,
            ErrorKind::Io => 5,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Config => "config",
            ErrorKind::Instability => "instability",
            ErrorKind::StepCollapse => "step-collapse",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub detail: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, detail: impl fmt::Display) -> Self {
        Self { kind, detail: detail.to_string() }
    }

    pub fn config(detail: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Config, detail)
    }

    pub fn io(detail: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Io, detail)
    }
}

/// `error[TAG]: detail`, always on one line.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = self.detail.replace('\n', "; ");
        write!(f, "error[{}]: {}", self.kind.tag(), detail.trim_end_matches("; "))
    }
}

impl std::error::Error for CliError {}

pub fn step_kind(e: &StepError) -> ErrorKind {
    match e {
        StepError::Instability { .. } => ErrorKind::Instability,
        StepError::StepCollapse { .. } => ErrorKind::StepCollapse,
        StepError::Config(_) => ErrorKind::Config,
    }
}

pub fn scenario_kind(e: &ScenarioError) -> ErrorKind {
    match e {
        ScenarioError::Snapshot(_) => ErrorKind::Io,
        _ => ErrorKind::Config,
    }
}

pub fn run_kind(e: &RunError) -> ErrorKind {
    match e {
        RunError::Scenario(s) => scenario_kind(s),
        RunError::Step { source, .. } => step_kind(source),
        RunError::Io { .. } => ErrorKind::Io,
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        Self::new(run_kind(&e), e)
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        Self::new(scenario_kind(&e), e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::config(e)
    }
}
