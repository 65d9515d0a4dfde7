use std::fmt;
use std::path::Path;

use feo_core::fixtures::FixtureError;
use feo_core::inference::InferenceError;
use feo_core::learning::LearningError;
use feo_core::network::NetworkError;
use feo_core::roles::RoleError;
use feo_core::sampler::SamplerError;
use feo_core::solver::SolverError;
use serde_json::json;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

/// A failed command: exit code plus the diagnostics written to stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
    /// Further `(kind, message)` diagnostics, one line each.
    pub related: Vec<(String, String)>,
}

impl CliError {
    pub fn input(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, kind: kind.into(), message: message.into(), related: Vec::new() }
    }

    pub fn internal(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, kind: kind.into(), message: message.into(), related: Vec::new() }
    }

    pub fn read(path: &Path, err: std::io::Error) -> Self {
        Self::input("IoError", format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: impl fmt::Display) -> Self {
        Self::internal("IoError", format!("cannot write {}: {err}", path.display()))
    }

    pub fn with_related(mut self, related: Vec<(String, String)>) -> Self {
        self.related = related;
        self
    }

    pub fn emit(&self, json: bool) {
        diagnostic(json, "error", &self.kind, &self.message);
        for (kind, message) in &self.related {
            diagnostic(json, "error", kind, message);
        }
    }
}

/// Writes one structured diagnostic line to stderr.
pub fn diagnostic(json: bool, level: &str, kind: &str, message: &str) {
    if json {
        eprintln!("{}", json!({ "level": level, "kind": kind, "message": message }));
    } else {
        eprintln!("level={level} kind={kind} message={message:?}");
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        Self::input(e.kind(), e.to_string())
    }
}

impl From<RoleError> for CliError {
    fn from(e: RoleError) -> Self {
        Self::input(e.kind(), e.to_string())
    }
}

impl From<LearningError> for CliError {
    fn from(e: LearningError) -> Self {
        Self::input(e.kind(), e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        Self::input(e.kind(), e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        let code = if e.is_infeasible() {
            EXIT_INFEASIBLE
        } else if matches!(e, SolverError::ValidationFailed(_)) {
            EXIT_INTERNAL
        } else {
            EXIT_INPUT
        };
        let related = match &e {
            SolverError::InfeasibleConstraints { conflict } => {
                conflict.iter().map(|c| ("Conflict".to_string(), c.clone())).collect()
            }
            _ => Vec::new(),
        };
        Self { code, kind: e.kind().to_string(), message: e.to_string(), related }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Io(msg) => Self::internal("IoError", msg),
            other => Self::input(other.kind(), other.to_string()),
        }
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Network(e) => e.into(),
            FixtureError::Roles(e) => e.into(),
            FixtureError::Learning(e) => e.into(),
            FixtureError::Solver(e) => e.into(),
            other => Self::input(other.kind(), other.to_string()),
        }
    }
}
