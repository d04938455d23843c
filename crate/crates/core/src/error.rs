use thiserror::Error;

/// Errors raised by grid construction, evolution, diagnostics and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite state at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("budget exceeded: {what} (maximum supported n_points = {max_n})")]
    Budget { what: String, max_n: usize },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("missing trace channel `{0}`")]
    MissingChannel(String),

    #[error("config error in key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
