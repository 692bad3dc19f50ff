//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max entry deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not unitary (max entry deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("{op} did not converge within {iterations} iterations")]
    ConvergenceFailure { op: &'static str, iterations: usize },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("degenerate spectrum: eigenvalues separated by only {gap:.3e}")]
    DegenerateSpectrum { gap: f64 },

    #[error("rank mismatch between decompositions: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("rank changed along the path at grid index {index}: {expected} -> {found}")]
    RankChange {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error(
        "ambiguous branch matching at branch {branch}: best/second-best |overlap| gap {gap:.3e}"
    )]
    AmbiguousMatching { branch: usize, gap: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("vanishing diagonal overlap on branch {branch}: optimal phase undefined")]
    VanishingOverlap { branch: usize },

    #[error("invalid nonunitary step: {0}")]
    InvalidStep(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} exceeds the supported limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
