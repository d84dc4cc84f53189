use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;
/// `batch --golden` only: a report differs from its golden file.
pub const EXIT_GOLDEN: i32 = 1;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    Compute(#[from] monodromy_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Schema(_) => EXIT_SCHEMA,
            LabError::Compute(e) if e.is_precision() => EXIT_PRECISION,
            LabError::Compute(_) | LabError::Io(_) => EXIT_COMPUTATION,
        }
    }
}

pub(crate) fn schema(msg: impl Into<String>) -> LabError {
    LabError::Schema(msg.into())
}
