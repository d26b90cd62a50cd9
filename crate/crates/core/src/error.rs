use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpaError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("weight is not admissible: {0}")]
    Admissibility(String),

    #[error("inexact division: remainder {remainder:e} exceeds tolerance {bound:e}")]
    InexactDivision { remainder: f64, bound: f64 },

    #[error("gram matrix is ill-conditioned (estimate {estimate:e})")]
    IllConditioned { estimate: f64 },

    #[error("exponent p = {0} is not supported by this operation")]
    UnsupportedExponent(String),

    #[error("degree n = {n} is too small for the composite construction (sigma = {sigma})")]
    NTooSmall { n: usize, sigma: i64 },

    #[error("operation not applicable: {0}")]
    Inapplicable(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("sweep failed to converge at n = {0:?}")]
    Sweep(Vec<usize>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, OpaError>;
