use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("pole hit: {0}")]
    Pole(String),
    #[error("new pole collides with an existing pole: {0}")]
    PoleCollision(String),
    #[error("series or sum does not converge: {0}")]
    Divergence(String),
    #[error("subspace is not invariant: residual {residual:.3e} exceeds {bound:.3e}")]
    NotInvariant { residual: f64, bound: f64 },
    #[error("singular step matrix at x = {0}")]
    SingularStep(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("non-generic parameters: {0}")]
    NonGenericParameter(String),
    #[error("non-generic spectrum: {0}")]
    NonGenericSpectrum(String),
    #[error("condition (*) or (**) violated: {0}")]
    StarViolation(String),
    #[error("isomorphism check failed at index {index}: residual {residual:.3e}")]
    IsomorphismFailure { index: usize, residual: f64 },
    #[error("unknown name: {0}")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, Error>;
