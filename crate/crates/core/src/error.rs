use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("insufficient subjects: need at least 3, got {0}")]
    InsufficientSubjects(usize),
    #[error("split ratios must be non-negative and sum to 1, got ({0}, {1}, {2})")]
    BadRatios(f64, f64, f64),
    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("invalid subject {id:?}: {reason}")]
    InvalidSubject { id: String, reason: String },
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("unknown activity {0:?}")]
    UnknownActivity(String),
}
