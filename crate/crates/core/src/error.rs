//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter block or truncation spec violates its own constraints.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A physical-parameter domain violation (e.g. zero detuning).
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Two operators from different Hilbert spaces were combined.
    #[error("Hilbert space mismatch: operator on space {left:#x} combined with space {right:#x}")]
    SpaceMismatch { left: u64, right: u64 },

    /// Unknown cavity mode or atomic label.
    #[error("unknown label: {0}")]
    UnknownLabel(String),

    /// Requested dense operation exceeds the configured size limit.
    #[error(
        "superoperator dimension {dim} exceeds the dense limit {limit}; \
         raise the limit or use the iterative eigensolver path"
    )]
    DenseLimit { dim: usize, limit: usize },

    /// The eigensolver failed to reach the requested tolerance.
    #[error("eigensolver did not converge: residual {residual:.3e} (tolerance {tol:.3e})")]
    EigenConvergence { residual: f64, tol: f64 },

    /// LAPACK backend failure.
    #[error("linear algebra backend error: {0}")]
    Lapack(String),

    /// A structural guarantee was violated at runtime (a bug, not user error).
    #[error("internal consistency violation: {0}")]
    Internal(String),

    /// Operation requires a strong symmetry but the model does not have one.
    #[error("model is not symmetric under the given unitary; violating commutator norms: {0}")]
    NotSymmetric(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Lapack(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
