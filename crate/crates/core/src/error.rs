use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("altitude {altitude} m outside valid range [{min}, {max}] m")]
    AltitudeOutOfRange { altitude: f64, min: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("drag singularity: zero cross-section with nonzero net force {net_force} N")]
    Singularity { net_force: f64 },

    #[error("integration blew up at t = {t} s")]
    IntegrationBlowup { t: f64 },

    #[error("wind query outside field on {axis} axis: {value}")]
    OutOfWindDomain { axis: &'static str, value: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("infeasible command: {0}")]
    Infeasible(String),

    #[error(
        "mole solver did not converge after {iterations} iterations (residual {residual} mol)"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by bad input (files, flags, config) rather than by an episode.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Config(_)
                | Error::Io { .. }
                | Error::AltitudeOutOfRange { .. }
        )
    }
}
