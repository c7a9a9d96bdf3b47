use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter or state value violates its domain.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("control value {value} outside [0, {u_max}]")]
    ControlBounds { value: f64, u_max: f64 },

    /// Settings that make a solver or formula undefined.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration became unstable at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("time {t} outside trajectory range [{t0}, {t_end}]")]
    Range { t: f64, t0: f64, t_end: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
