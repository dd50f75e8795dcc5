use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numeric parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A scenario or schedule cannot be built from the given inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// The series evaluator ran out of terms before meeting its tail bound.
    /// Carries the partial sum so callers can still inspect it.
    #[error(
        "series truncation failed after {terms} terms \
         (partial sum {partial_sum}, tail bound reached {tail_bound}, requested {requested})"
    )]
    PrecisionFailure {
        terms: usize,
        partial_sum: f64,
        tail_bound: f64,
        requested: f64,
    },

    /// A formula evaluation produced a non-finite or out-of-range value.
    #[error("numeric range error: {0}")]
    NumericRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
