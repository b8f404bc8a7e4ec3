use thiserror::Error;

/// Errors reported by the library. Every variant is a guard or contract
/// violation; none of the exact routines fail on valid input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubeError {
    #[error("dimension {dim} exceeds the limit {limit} for {operation}")]
    DimensionTooLarge {
        operation: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("matrix has rank {rank}, expected at least {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("vectors are not linearly independent (rank {rank} of {count})")]
    NotIndependent { rank: usize, count: usize },

    #[error("strong rank of a family of {size} vectors exceeds the search limit {limit}")]
    TooExpensive { size: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl CubeError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            CubeError::DimensionTooLarge { .. } => "DimensionTooLarge",
            CubeError::RankDeficient { .. } => "RankDeficient",
            CubeError::NotIndependent { .. } => "NotIndependent",
            CubeError::TooExpensive { .. } => "TooExpensive",
            CubeError::InvalidInput(_) => "InvalidInput",
        }
    }

    pub(crate) fn too_large(operation: &'static str, dim: usize, limit: usize) -> Self {
        CubeError::DimensionTooLarge {
            operation,
            dim,
            limit,
        }
    }
}

pub type Result<T> = std::result::Result<T, CubeError>;
