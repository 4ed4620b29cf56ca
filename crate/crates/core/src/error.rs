use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the simulator.
///
/// Variants are grouped so a front end can map them onto exit codes:
/// malformed input, violated preconditions, and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Brute-force enumeration refused because 2^n is too large.
    #[error("refusing to enumerate 2^{n} assignments (limit n <= {limit})")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("random instance generation failed: {0}")]
    Generation(String),

    #[error("measurement outcome {outcome} has probability {prob:e}, cannot collapse")]
    DegenerateCollapse { outcome: u8, prob: f64 },

    #[error("basis states are not orthonormal (deviation {0:e})")]
    NonOrthogonalBasis(f64),

    #[error("eigenvalues too close for the closed-form amplitude (gap {0:e})")]
    DegenerateSpectrum(f64),

    #[error("Krylov propagation did not converge: {0}")]
    KrylovNonConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCollapse { .. }
                | Error::DegenerateSpectrum(_)
                | Error::KrylovNonConvergence(_)
                | Error::Numerical(_)
        )
    }
}
