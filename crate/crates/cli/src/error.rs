use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: `{key}`: {message}")]
    Config { path: String, key: String, line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Core(#[from] sqzcool::Error),

    #[error("{context}: {source}")]
    CoreAt { context: String, source: sqzcool::Error },
}

/// Machine-readable error document written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    pub exit_code: i32,
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn at(context: impl Into<String>) -> impl FnOnce(sqzcool::Error) -> CliError {
        let context = context.into();
        move |source| CliError::CoreAt { context, source }
    }

    fn core(&self) -> Option<&sqzcool::Error> {
        match self {
            CliError::Core(e) | CliError::CoreAt { source: e, .. } => Some(e),
            _ => None,
        }
    }

    /// 1 for physics outcomes, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self.core() {
            Some(e) if e.is_physics() => 1,
            _ => 2,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (error, key, line) = match self {
            CliError::Config { key, line, .. } => ("ConfigError", Some(key.clone()), Some(*line)),
            CliError::Usage(_) => ("UsageError", None, None),
            CliError::Io { .. } => ("IoError", None, None),
            CliError::Core(e) | CliError::CoreAt { source: e, .. } => {
                let key = match e {
                    sqzcool::Error::InvalidParameter { name, .. } => Some(name.to_string()),
                    _ => None,
                };
                (e.kind(), key, None)
            }
        };
        ErrorReport {
            error,
            message: self.to_string(),
            key,
            line,
            detail: self.core().map(detail),
            exit_code: self.exit_code(),
        }
    }
}

fn detail(e: &sqzcool::Error) -> serde_json::Value {
    use serde_json::json;
    use sqzcool::Error::*;
    match e {
        InvalidParameter { name, reason } => json!({ "name": name, "reason": reason }),
        DiscriminantNegative { r, r_c } => json!({ "r": r, "r_c": r_c }),
        NoConvergence { what, iterations } => json!({ "what": what, "iterations": iterations }),
        NotCooling { delta, gamma_opt } => json!({ "delta": delta, "gamma_opt": gamma_opt }),
        Unstable { growth_rate } => json!({ "growth_rate": growth_rate }),
        NonConvergent { what, estimate, error } => json!({ "what": what, "estimate": estimate, "error": error }),
        NotLorentzian { asymmetry } => json!({ "asymmetry": asymmetry }),
        GenericPhase { theta } => json!({ "theta": theta }),
        InsufficientSamples { found, required } => json!({ "found": found, "required": required }),
        NoSolution { residual } => json!({ "residual": residual }),
        IllConditioned { condition } => json!({ "condition": condition }),
    }
}
