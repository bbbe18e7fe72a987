use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n = {0}")]
    Dimension(usize),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("remainder has no declared decay exponent")]
    MissingDecay,
    #[error("tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailBound { bound: f64, tol: f64 },
    #[error("quadrature did not converge ({0})")]
    Quadrature(String),
    #[error("Laguerre scale must be positive, got r = {0}")]
    Scale(f64),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("reconstruction error {err:e} above tolerance {tol:e}")]
    Reconstruction { err: f64, tol: f64 },
    #[error("evaluation at a pole: {0}")]
    Pole(String),
    #[error("branch violation: {0}")]
    Branch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("fit matrix condition {0:e} above threshold")]
    Condition(f64),
    #[error("N-consistency violated: |l0(N) - l0(N+1)| = {0:e}")]
    Inconsistent(f64),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
