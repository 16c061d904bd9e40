use thiserror::Error;

/// Errors raised by the aggregation, counting and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix rank {rank} is below the row count {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("right-hand side is not in the integer lattice generated by the columns")]
    InfeasibleByLattice,
    #[error("cone generated by the columns is not pointed")]
    NotPointed,
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("no spurious solution could be constructed: {0}")]
    WitnessNotFound(String),
    #[error("equation has infinitely many nonnegative solutions")]
    InfiniteCount,
    #[error("invalid knapsack coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("coefficient {index} is not strictly positive")]
    NonPositiveCoefficient { index: usize },
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeOverflow { degree: String, cap: u64 },
    #[error("spectral estimate error bound {bound} is not below 1/2")]
    PrecisionLoss { bound: f64 },
    #[error("enumeration window of {points} points exceeds the cap {cap}")]
    WindowTooLarge { points: String, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
