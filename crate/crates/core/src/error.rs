use thiserror::Error;

/// Errors raised by the simulation, estimation and inference routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("degenerate T={t}: resolved rho={rho} is on the wrong side of 1 for {regime}")]
    DegenerateT {
        t: usize,
        rho: f64,
        regime: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid innovation family: {0}")]
    InvalidInnovations(String),

    #[error("zero denominator: every lagged observation is zero")]
    ZeroDenominator,

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("innovations are not attached to the panel and residual mode was not accepted")]
    MissingInnovations,

    #[error("zero variance of the standardized numerator")]
    ZeroVariance,

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("unbalanced panel: {0}")]
    UnbalancedPanel(String),

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("series {series} has nonzero initial value {value}")]
    NonzeroInitial { series: usize, value: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("grid needs at least {required} strictly increasing points, got {got}")]
    InsufficientGrid { required: usize, got: usize },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("missing regime parameters: {0}")]
    MissingParameters(String),

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error comes from the data rather than the configuration or the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::UnbalancedPanel(_)
                | Error::MalformedRow { .. }
                | Error::NonzeroInitial { .. }
                | Error::RegimeMismatch(_)
                | Error::MissingInnovations
                | Error::WrongRegime(_)
                | Error::Io(_)
        )
    }

    /// Whether the error is a numerical failure (degenerate sums, overflow).
    pub fn is_numerical_error(&self) -> bool {
        match self {
            Error::ZeroDenominator | Error::ZeroVariance | Error::NumericalRange(_) => true,
            Error::Replication { source, .. } => source.is_numerical_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
