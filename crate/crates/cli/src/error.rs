use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Value};

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_FINDING: u8 = 4;
pub const EXIT_INAPPLICABLE: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Core(ud_core::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        use ud_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                E::NotFeasible(_) => EXIT_INFEASIBLE,
                E::NotCommuting { .. }
                | E::DegenerateOverlap { .. }
                | E::PreconditionFailed { .. } => EXIT_INAPPLICABLE,
                E::NumericalFailure(_) => EXIT_INTERNAL,
                _ => EXIT_VALIDATION,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, details) = match self {
            CliError::Core(e) => (e.kind(), e.details()),
            CliError::Io { path, .. } => ("Io", json!({ "path": path })),
            CliError::Usage(_) => ("Usage", json!({})),
        };
        json!({
            "error": {
                "kind": kind,
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "details": details,
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<ud_core::Error> for CliError {
    fn from(e: ud_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(ud_core::Error::Json(e))
    }
}
