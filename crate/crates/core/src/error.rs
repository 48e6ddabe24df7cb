use serde_json::{json, Value};
use thiserror::Error;

use crate::discrimination::FeasibilityWitness;
use crate::povm::PovmReport;
use crate::states::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid mixture weights: {0}")]
    WeightError(String),

    #[error("value out of range: {0}")]
    RangeError(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(ValidationReport),

    #[error("invalid POVM: {0}")]
    InvalidPovm(PovmReport),

    #[error("states cannot be unambiguously discriminated (ranks {} / {}, joint {})",
        .0.rank1, .0.rank2, .0.joint_rank)]
    NotFeasible(FeasibilityWitness),

    #[error("supports intersect in a {intersection_dim}-dimensional subspace")]
    OverlappingSupports { intersection_dim: usize },

    #[error("states do not commute (commutator norm {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("pure-state overlap {overlap} must lie strictly between 0 and 1")]
    DegenerateOverlap { overlap: f64 },

    #[error("precondition failed: {what} = {value:.3e}")]
    PreconditionFailed { what: String, value: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPsd { .. } => "NotPsd",
            Error::NotSquare { .. } => "NotSquare",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::DimensionOverflow { .. } => "DimensionOverflow",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyInput => "EmptyInput",
            Error::WeightError(_) => "WeightError",
            Error::RangeError(_) => "RangeError",
            Error::InvalidDensity(_) => "InvalidDensity",
            Error::InvalidPovm(_) => "InvalidPovm",
            Error::NotFeasible(_) => "NotFeasible",
            Error::OverlappingSupports { .. } => "OverlappingSupports",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::DegenerateOverlap { .. } => "DegenerateOverlap",
            Error::PreconditionFailed { .. } => "PreconditionFailed",
            Error::Json(_) => "Json",
        }
    }

    /// Structured fields of the error (residuals, ranks, dimensions).
    pub fn details(&self) -> Value {
        let finite = |x: f64| {
            if x.is_finite() {
                json!(x)
            } else {
                json!(x.to_string())
            }
        };
        match self {
            Error::NotHermitian { residual } | Error::NotCommuting { residual } => {
                json!({ "residual": finite(*residual) })
            }
            Error::NotPsd { min_eigenvalue } => {
                json!({ "min_eigenvalue": finite(*min_eigenvalue) })
            }
            Error::NotSquare { rows, cols } => json!({ "rows": rows, "cols": cols }),
            Error::DimensionOverflow { dim, cap } => json!({ "dim": dim, "cap": cap }),
            Error::DimensionMismatch { expected, found } => {
                json!({ "expected": expected, "found": found })
            }
            Error::InvalidDensity(r) => serde_json::to_value(r).unwrap_or(Value::Null),
            Error::InvalidPovm(r) => serde_json::to_value(r).unwrap_or(Value::Null),
            Error::NotFeasible(w) => serde_json::to_value(w).unwrap_or(Value::Null),
            Error::OverlappingSupports { intersection_dim } => {
                json!({ "intersection_dim": intersection_dim })
            }
            Error::DegenerateOverlap { overlap } => json!({ "overlap": finite(*overlap) }),
            Error::PreconditionFailed { what, value } => {
                json!({ "what": what, "value": finite(*value) })
            }
            Error::Json(e) => json!({ "line": e.line(), "column": e.column() }),
            Error::NumericalFailure(_)
            | Error::EmptyInput
            | Error::WeightError(_)
            | Error::RangeError(_) => json!({}),
        }
    }
}
