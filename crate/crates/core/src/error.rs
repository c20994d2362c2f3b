use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("number of atoms must be at least 1")]
    ZeroAtoms,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("operator has a nonzero offset-1 band; parity blocking needs m <-> m±2 coupling only")]
    OddBandPresent,

    #[error("operator is not real symmetric (max |Im| = {max_imag:e})")]
    NotRealSymmetric { max_imag: f64 },

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("operation requires the {expected} scheme")]
    WrongScheme { expected: &'static str },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time grid is not strictly ascending at index {index}")]
    NonAscendingGrid { index: usize },

    #[error("time grid under-resolved: spacing {spacing:e} exceeds 0.1/N = {limit:e} (in Ω_R t units)")]
    UnderResolvedGrid { spacing: f64, limit: f64 },

    #[error("oracle supports at most {max} atoms, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::NotNormalized { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
