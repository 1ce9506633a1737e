use std::path::PathBuf;

use bloch_dno::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Core(#[source] CoreError),

    #[error("numerical failure: {0}")]
    Numerical(#[source] CoreError),

    #[error("{0}")]
    Invariant(#[source] CoreError),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } | CliError::Core(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Write { .. } => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

/// Errors raised while computing, sorted by what went wrong. Bad inputs that
/// slip past validation still count as config errors.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        use CoreError::*;
        match e {
            InvalidTruncation(_)
            | InvalidProfile(_)
            | Aliasing { .. }
            | UnsupportedOrder(_)
            | InsufficientTruncation { .. }
            | InvalidThetaGrid(_)
            | OracleResolution(_)
            | OutsideValidityRegion { .. }
            | UnknownPreset(_) => CliError::Core(e),
            OracleSolve { .. }
            | SmallDivisor { .. }
            | OrderMismatch { .. }
            | ClosedGap
            | InsufficientData(_) => CliError::Numerical(e),
            NotHermitian { .. }
            | Instability { .. }
            | InvariantViolation(_)
            | DimensionMismatch { .. } => CliError::Invariant(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
