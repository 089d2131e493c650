use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}, column `{column}`: cannot parse {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("feature `{feature}`: unknown category {label:?}")]
    Encoding { feature: String, label: String },

    #[error("index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error(
        "{features} features exceed the exact-enumeration limit of {limit}; use the sampled backend"
    )]
    Capacity { features: usize, limit: usize },

    #[error("explaining with feature {feature} nullified: {source}")]
    Explainer { feature: usize, source: Box<Error> },

    #[error("feature `{feature}` is constant")]
    DegenerateColumn { feature: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),
}
