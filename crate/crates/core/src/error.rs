use crate::frames::Frame;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frame mismatch: operator described in {operator:?} frame, operand in {operand:?} frame")]
    FrameMismatch { operator: Frame, operand: Frame },

    #[error("precondition violated ({name}): {reason}")]
    Precondition { name: &'static str, reason: String },

    #[error("send counter overflow: {0}")]
    CounterOverflow(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Precondition {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration rather than I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Precondition { .. }
                | Error::CounterOverflow(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
