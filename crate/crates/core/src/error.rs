use thiserror::Error;

/// Errors raised by the flux laboratory.
///
/// Variants are grouped by how a caller is expected to react: argument and
/// dimension errors are caller mistakes, domain and capability errors mean the
/// request is well formed but cannot be served for this input.
#[derive(Debug, Error)]
pub enum FluxError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Format(String),
}

impl FluxError {
    pub(crate) fn dim(what: &'static str, expected: usize, got: usize) -> Self {
        FluxError::Dimension { what, expected, got }
    }
}

pub type Result<T> = std::result::Result<T, FluxError>;
