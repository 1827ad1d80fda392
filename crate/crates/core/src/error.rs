use thiserror::Error;

/// Errors raised by the simulation and pricing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time grid is invalid: {0}")]
    InvalidGrid(String),

    /// A drift with a `1/(1-t)` factor was asked to integrate up to (or past) `t = 1`.
    #[error("grid reaches t = {t}, where the 1/(1-t) drift is singular")]
    SingularHorizon { t: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Rank-deficient design or hedge-factor matrix.
    #[error("matrix is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
