use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hurst exponent must lie in the open interval (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("{what}: need at least {min} elements, got {got}")]
    InvalidSize {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("ill-conditioned Toeplitz system (m = {m}, failed at step {step})")]
    IllConditioned { m: usize, step: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("series cannot be Gaussianized by a power transform: {0}")]
    Unfittable(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("simulation method failed: {0}")]
    MethodFailure(String),

    #[error("input error at line {line}: {message}")]
    Input { line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidHurst(_) | Error::Domain(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
