use thiserror::Error;

use crate::arsys::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("inadmissible root system {name}: {reason}")]
    Inadmissible { name: String, reason: String },

    #[error("singular matrix: rank {rank} < {dim}")]
    Singular { rank: usize, dim: usize },

    #[error("{0} is not a prime")]
    NotPrime(i64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("vector {0:?} is not a root of the system")]
    NotARoot(Vec<i64>),

    #[error("root set is not closed under negation")]
    NotSymmetric,

    #[error("extension datum rejected: {0}")]
    InvalidDatum(ValidationReport),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("not a subroot system: {0}")]
    NotSubroot(String),

    #[error("not a common period: {0}")]
    NotPeriod(String),

    #[error("cell bound exceeded: quotient has {cells} cells, bound is {bound}")]
    CellBound { cells: usize, bound: usize },

    #[error("search bound exceeded: {0}")]
    SearchBound(String),

    #[error("not a triple descriptor: {0}")]
    NotTriple(String),
}
