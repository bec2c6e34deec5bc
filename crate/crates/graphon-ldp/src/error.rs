use thiserror::Error;

/// Errors produced by graphon operations, samplers, and solvers.
#[derive(Debug, Error)]
pub enum GraphonLdpError {
    #[error("resolution mismatch: {m1} vs {m2}")]
    ResolutionMismatch { m1: usize, m2: usize },

    #[error("resolution {m} exceeds the exact cut-norm limit {max}")]
    ResolutionTooLarge { m: usize, max: usize },

    #[error("size mismatch: {what}")]
    SizeMismatch { what: String },

    #[error("domain error: {what}")]
    Domain { what: String },

    #[error("reference graphon has a cell value in {{0,1}}; log-integrability fails")]
    InvalidReference,

    #[error("degenerate reference: {what}")]
    DegenerateReference { what: String },

    #[error("perturbed graphon leaves [0,1]: {what}")]
    PerturbationOutOfRange { what: String },

    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("parse error at line {line}: {what}")]
    Parse { line: usize, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphonLdpError>;
