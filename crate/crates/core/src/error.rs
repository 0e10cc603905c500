use thiserror::Error;

/// Errors surfaced by constructors and solvers.
///
/// Numerical edge cases that have a well-defined extended value (for example a
/// divergence with a support violation) do NOT error; they return `f64::INFINITY`.
/// Errors are reserved for malformed inputs and guard violations.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector failed validation.
    #[error("invalid distribution{}: {reason}", fmt_field(.field))]
    InvalidDistribution { field: String, reason: String },

    /// A channel matrix failed validation.
    #[error("invalid channel{}: {reason}", fmt_field(.field))]
    InvalidChannel { field: String, reason: String },

    /// Dimensions of two objects do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar parameter is out of its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// A complexity guard refused the instance.
    #[error("guard violation: {0}")]
    Guard(String),

    /// An iterative solve exhausted its budget; the caller may still have a
    /// best-effort result with a residual attached.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

fn fmt_field(field: &str) -> String {
    if field.is_empty() {
        String::new()
    } else {
        format!(" at {field}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
