use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("likeness is undefined for the zero vector")]
    ZeroVector,

    #[error("empty basis: likeness of the zero subspace is undefined")]
    EmptyBasis,

    #[error("basis vectors are linearly dependent (rank {rank} < {count})")]
    DependentBasis { rank: usize, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid normal form parameters: {0}")]
    InvalidNormalForm(String),

    #[error("Euclidean classification not covered: needs dim V = k <= n or dim V = n+1 (k={k}, n={n}, dim V={dim})")]
    EuclideanNotCovered { k: usize, n: usize, dim: usize },

    #[error("outside the hypotheses of the Euclidean comparison (k={k}, n={n}, dim V={dim})")]
    ComparisonNotCovered { k: usize, n: usize, dim: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("singular or empty fiber: {0}")]
    SingularFiber(String),

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("numerical guard tripped at stage {stage}: {detail}")]
    Guard { stage: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
