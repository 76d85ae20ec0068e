use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The geometry or configuration cannot be simulated.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An image source lies on or inside the observation sphere.
    #[error("near-field overlap unsupported: source at {distance} m, array radius {radius} m")]
    NearField { distance: f64, radius: f64 },

    /// The directional sampling grid cannot support the requested order.
    #[error("ill-conditioned SH analysis grid: condition number {condition:.3e} exceeds {limit:.3e}")]
    IllConditioned { condition: f64, limit: f64 },

    /// Numerical results violated an internal consistency check.
    #[error("model error: {0}")]
    Model(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
