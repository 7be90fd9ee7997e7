use pulse_squeeze_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{context}: {source}")]
    Context { context: String, source: CoreError },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0} verification check(s) failed")]
    Verify(usize),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Core(e) | CliError::Context { source: e, .. } => e,
            CliError::Config(_) | CliError::Io(_) => return 1,
            CliError::Verify(_) => return 2,
        };
        match core {
            CoreError::InvalidParameter(_)
            | CoreError::InvalidGrid(_)
            | CoreError::GridMismatch(_)
            | CoreError::GridTooShort { .. }
            | CoreError::MixedTarget(_)
            | CoreError::Io(_)
            | CoreError::Json(_) => 1,
            _ => 2,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for pulse_squeeze_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Context { context: what(), source })
    }
}
