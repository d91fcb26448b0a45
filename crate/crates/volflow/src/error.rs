use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver failure: {0}")]
    Solver(volflow_core::Error),
    #[error("computation failed: {0}")]
    Compute(volflow_core::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { field: field.into(), message: message.into() }
    }

    /// 0 pass, 1 check failure, 2 usage/schema/io, 3 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::CheckFailed(_) => 1,
            Self::Usage(_) | Self::Schema { .. } | Self::Io { .. } => 2,
            Self::Solver(_) | Self::Compute(_) => 3,
        }
    }
}
