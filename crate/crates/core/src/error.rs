use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero vector: at least one nonzero amplitude is required")]
    ZeroVector,

    #[error("label error: {0}")]
    Label(String),

    #[error("role collision: both factors populate the {0} role")]
    RoleCollision(&'static str),

    #[error("basis coverage error: operator basis does not contain {0}")]
    BasisCoverage(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("history depth error: memory registers have lengths {min}..={max}")]
    HistoryDepth { min: usize, max: usize },

    #[error("use class mode: {branches} branches exceed the exact-mode limit of {limit}")]
    SizeGuard { branches: u128, limit: u128 },

    #[error("invalid class: {0}")]
    InvalidClass(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-orthogonal Phi basis: no unitary completion (overlap {overlap})")]
    NoUnitaryCompletion { overlap: f64 },

    #[error("invalid basis transform: residual {residual:e} exceeds tolerance")]
    InvalidBasisTransform { residual: f64 },

    #[error("operator failed unitarity check: residual {residual:e}")]
    NotUnitary { residual: f64 },
}
