use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded for {what}: need {required} items, budget {budget}")]
    BudgetExceeded {
        what: String,
        required: String,
        budget: u64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric: asymmetry {asymmetry:e} exceeds {limit:e}")]
    NotSymmetric { asymmetry: f64, limit: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
