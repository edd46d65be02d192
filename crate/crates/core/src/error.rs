use thiserror::Error;

/// Errors raised anywhere in the scoring pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DacError {
    /// Malformed input: bad distribution parameters, empty data, bad config.
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The benchmark KL divergence is zero or infinite, so DAC ratios are undefined.
    #[error("undefined DAC ratio: {0}")]
    UndefinedRatio(String),

    /// A numerical procedure failed to produce a usable value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl DacError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Self::Validation(_) | Self::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, DacError>;
