use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("value is NaN")]
    NotANumber,
    #[error("cannot parse `{0}` as an extended real (use a number, \"+inf\" or \"-inf\")")]
    BadExtReal(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("interval lower end {lo} exceeds upper end {hi}")]
    EmptyInterval { lo: String, hi: String },
    #[error("MLRP check needs distributions of one variant, got {0} and {1}")]
    MixedVariants(&'static str, &'static str),
    #[error("path validation failed: {0}")]
    InvalidPath(String),
    #[error("scenario violates {inequality}: {detail}")]
    Scenario { inequality: &'static str, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
