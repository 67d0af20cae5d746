use thiserror::Error;

/// Errors raised by the solvers, estimators and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid probability vector: {0}")]
    InvalidWeights(String),

    #[error("infeasible marginals: total masses {0} and {1} differ")]
    InfeasibleMarginals(f64, f64),

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("input is not sorted ascending")]
    Unsorted,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded: {pairs} tuple pairs (limit {limit}); use the incomplete estimator")]
    EnumerationBudget { pairs: f64, limit: f64 },

    #[error("unsupported kernel for this operation: {0}")]
    UnsupportedKernel(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
