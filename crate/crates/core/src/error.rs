use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ordered partition rejected: {0}")]
    PartitionInfeasible(String),

    #[error("t = {t} is outside the validity horizon {horizon} of the linear plan")]
    OutsideHorizon { t: Box<Rational>, horizon: Box<Rational> },

    #[error("route {route} does not have a single-kink linear cost")]
    NotLinear { route: usize },

    #[error("lattice of {size} points exceeds the cap of {cap}")]
    LatticeTooLarge { size: u128, cap: u128 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
