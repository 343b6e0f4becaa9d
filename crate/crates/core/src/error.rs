use thiserror::Error;

/// Every failure the kernel can report. Nothing is silently approximated:
/// when a truncation cannot certify an answer the caller gets
/// [`Error::InsufficientPrecision`] and should retry with larger bounds.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field mismatch: {0}")]
    TowerMismatch(String),
    #[error("variable mismatch: {0} vs {1}")]
    VariableMismatch(String, String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("argument has non-positive valuation")]
    NonpositiveValuation,
    #[error("argument is not a one-unit")]
    NotAOneUnit,
    #[error("residue characteristic is not zero")]
    CharacteristicNotZero,
    #[error("zero has no unit decomposition")]
    ZeroElement,
    #[error("extension is not of Kummer shape: {0}")]
    NotKummer(String),
    #[error("curve germ is not regular at the point")]
    NotRegular,
    #[error("target values are unbalanced (valuations sum to {0})")]
    Unbalanced(i64),
    #[error("recursion depth limit {0} reached")]
    DepthLimit(usize),
    #[error("point does not lie on curve: {0}")]
    NotIncident(String),
    #[error("unknown flag: {0}")]
    UnknownFlag(String),
    #[error("adele condition violated: {0}")]
    AdeleCondition(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::InsufficientPrecision(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
