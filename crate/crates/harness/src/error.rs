use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("statistical check failed: {0}")]
    Statistical(String),
    #[error("schema violation in {table} row {row}: {reason}")]
    Schema {
        table: &'static str,
        row: usize,
        reason: String,
    },
    #[error("{0}")]
    Run(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 2 for a failed statistical check, 3 for a config error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Statistical(_) => 2,
            HarnessError::Config(_) => 3,
            _ => 1,
        }
    }

    pub fn run(e: impl std::fmt::Display) -> HarnessError {
        HarnessError::Run(e.to_string())
    }
}
