//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} sums to {sum:.12}, deviates from 1 by more than 1e-9")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("column {col} has no positive entry")]
    AllZeroColumn { col: usize },
    #[error("materialized kernel would need {entries} entries, cap is {cap}")]
    DimensionOverflow { entries: u128, cap: usize },
    #[error("Gram matrix WW^T is numerically singular; log-det penalty is -inf")]
    SingularGram,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("no closed-form penalty for this kernel family")]
    NoClosedForm,
    #[error("{what} = {value} outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("count vector sums to {got}, total constraint requires {want}")]
    ConstraintViolated { got: u64, want: u64 },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilityVector(String),
    #[error("target mean {mean} infeasible for support cap {s_n}")]
    InfeasibleMean { mean: f64, s_n: usize },
    #[error("state space too large: {states} states, cap is {cap}")]
    StateSpaceTooLarge { states: u128, cap: u64 },
    #[error("output count {value} exceeds marginal truncation cap {cap}")]
    TruncationExceeded { value: u64, cap: usize },
    #[error("minimum column sum {col_sum} violates lower bound n^-eta = {bound}")]
    ColumnBoundViolated { col_sum: f64, bound: f64 },
    #[error("kernel is not well-conditioned: {0}")]
    NotWellConditioned(String),
    #[error("beta = {beta} outside regime ({lo}, {hi})")]
    RegimeViolation { beta: f64, lo: f64, hi: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("constraint target {target} is not attainable (n*g must be a positive integer)")]
    InfeasibleTarget { target: f64 },
    #[error("rejection sampling stalled: acceptance rate below {min_rate}")]
    RejectionStall { min_rate: f64 },
    #[error("usage: {0}")]
    UsageError(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
