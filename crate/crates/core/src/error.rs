use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad model parameters (arities, block counts, truncation degree).
    #[error("configuration error: {0}")]
    Config(String),

    /// A twist entry failed validation. `index` points into the raw entry list.
    #[error("lambda entry {index} ({i},{j},{s},{t}): {reason}")]
    Lambda {
        index: usize,
        i: usize,
        j: usize,
        s: usize,
        t: usize,
        reason: String,
    },

    /// Out-of-range block or letter, mismatched dimensions.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numerical precondition did not hold for the given input.
    #[error("rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
