use thiserror::Error;

/// Failures surfaced to the shell; [`CliError::exit_code`] maps them to 2 and 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{stage} failed: {message}")]
    Pipeline { stage: String, message: String },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn pipeline(stage: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Pipeline { stage: stage.to_string(), message: msg.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Pipeline { .. } => 3,
        }
    }

    /// Re-labels any error as a failure of `stage`.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            CliError::Input(m) => CliError::pipeline(stage, m),
            CliError::Pipeline { message, .. } => CliError::pipeline(stage, message),
        }
    }
}
