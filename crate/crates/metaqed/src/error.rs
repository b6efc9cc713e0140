use std::path::PathBuf;

/// Failures raised by the models, fits and I/O layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    /// A quantity that is infinite at this point, e.g. a lossless pole.
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("fit did not converge after {evaluations} evaluations (rms residual {residual:.3e})")]
    FitFailure {
        evaluations: usize,
        residual: f64,
        /// Best parameter vector reached, in the fit's own parameterization.
        best: Vec<f64>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Domain(_) => 2,
            Error::Io { .. } | Error::Parse { .. } => 3,
            Error::Divergent(_) | Error::Numerical(_) | Error::FitFailure { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
