use thiserror::Error;

/// Everything that can go wrong inside the kernel, the step maps and the oracles.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("argument too large: spectral bound {bound:.6} must stay below {limit:.6}")]
    ArgumentTooLarge { bound: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("Hamiltonian is not separable (H_xp = {0:e})")]
    NotSeparable(f64),

    #[error("state outside the problem domain: {0}")]
    DomainViolation(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("theta-form violated: |theta^T - S^-1 theta S| = {0:e}")]
    ThetaFormViolation(f64),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
