//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("Bob marginal is singular (min eigenvalue {min_eig:.3e}); inverse canonical map undefined")]
    SingularMarginal { min_eig: f64 },

    #[error("solver hit the iteration cap {iters} with residual {residual:.3e} still improving")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("residual direction is numerically zero; no separating witness for this assemblage")]
    DegenerateDirection,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("insufficient examples: {0}")]
    InsufficientExamples(String),

    #[error("dataset mixes feature schemes or measurement counts")]
    MixedScheme,

    #[error("scheme mismatch: model expects {expected}, dataset has {got}")]
    SchemeMismatch { expected: String, got: String },

    #[error("draw budget exhausted after {draws} draws ({pos} steerable, {neg} unsteerable labeled)")]
    BudgetExhausted { draws: usize, pos: usize, neg: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
