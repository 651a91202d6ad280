use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("block {index} out of range for a layout of {blocks} blocks")]
    BlockOutOfRange { index: usize, blocks: usize },

    #[error("invalid block layout: {0}")]
    InvalidLayout(String),

    #[error("noise rate {0} outside [0, 1/2)")]
    InvalidNoiseRate(f64),

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("example stream exhausted after {0} draws")]
    StreamExhausted(u64),

    #[error("empty sample")]
    EmptySample,

    #[error("k = {k} exceeds the supported maximum of {cap}")]
    TooManyBits { k: usize, cap: usize },

    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exact enumeration of {size} points exceeds the cap of {cap}")]
    ProductSpaceTooLarge { size: u128, cap: u128 },

    #[error("query budget of {0} exhausted")]
    QueryBudgetExceeded(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown name: {0}")]
    UnknownName(String),
}
