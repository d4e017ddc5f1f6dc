use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("codeword must contain at least one symbol")]
    EmptyCodeword,

    #[error("codeword symbol at position {index} is {value}, expected +1 or -1")]
    InvalidSymbol { index: usize, value: f64 },

    #[error("oversampling factor must be at least 1, got {0}")]
    InvalidOversampling(usize),

    #[error("projection count K must be at least 3, got {0}")]
    InvalidProjectionCount(u32),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("codeword length {found} does not match the code length {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("generator matrix is malformed: {0}")]
    MalformedGenerator(String),

    #[error("generator matrix has rank {rank} over GF(2) but {rows} rows")]
    RankDeficient { rows: usize, rank: usize },

    #[error("code has {size} codewords, above the enumeration limit of {limit}")]
    TooLarge { size: f64, limit: u64 },

    #[error("operation requires a linear code")]
    NotLinear,

    #[error("code contains no codewords")]
    EmptyCode,

    #[error("expected a {expected} distribution")]
    WrongFlavor { expected: &'static str },

    #[error("condition cannot be met: W_{k} is positive where binomial coefficient is zero")]
    Infeasible { k: usize },

    #[error("outage level {eps} is below the curve's resolution; smallest resolvable level is {min_eps}")]
    UnresolvedEpsilon { eps: f64, min_eps: f64 },

    #[error("threshold grid ends before the curve drops to {eps}")]
    GridTooShort { eps: f64 },

    #[error("mu grid is empty")]
    EmptyMuGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
