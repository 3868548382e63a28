use thiserror::Error;

/// Errors produced by the coding, decoding, analysis and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be inverted is numerically singular. For channel
    /// matrices this marks a degenerate fading draw.
    #[error("singular matrix: |det| or pivot {magnitude:e} <= threshold {threshold:e}")]
    SingularMatrix { magnitude: f64, threshold: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("unsupported constellation order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),

    #[error("bit sequence of length {len} is not a multiple of {multiple}")]
    LengthMismatch { len: usize, multiple: usize },

    #[error("search needs {required} hypotheses but the budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },

    #[error("codeword difference requested for identical symbol vectors")]
    IdenticalInputs,

    #[error("insufficient errors for a slope fit: {reason}")]
    InsufficientErrors { reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
