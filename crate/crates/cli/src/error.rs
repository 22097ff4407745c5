use thiserror::Error;

/// Failures of a CLI run, each mapped to its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    ConfigParse(String),

    #[error("unknown configuration key: {0}")]
    UnknownKey(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Run(#[from] panel_ar::Error),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IO: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse(_) | CliError::UnknownKey(_) | CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Run(panel_ar::Error::Io(_)) => EXIT_IO,
            CliError::Run(e) if e.is_data_error() => EXIT_DATA,
            CliError::Run(e) if e.is_numerical_error() => EXIT_NUMERICAL,
            // Argument errors that slipped past validation.
            CliError::Run(_) => EXIT_CONFIG,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
