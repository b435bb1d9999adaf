use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map line {line}: {message}")]
    MapFormat { line: usize, message: String },

    #[error("degenerate world bounds ({width} x {height})")]
    DegenerateBounds { width: f64, height: f64 },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("point ({x:.3}, {y:.3}) lies outside the map")]
    OutOfBounds { x: f64, y: f64 },

    #[error("{which} position ({x:.3}, {y:.3}) is inside an occupied cell")]
    BlockedEndpoint { which: &'static str, x: f64, y: f64 },

    #[error("could not resolve a target object from instruction {0:?}")]
    ParseFailure(String),

    #[error("cannot aggregate metrics over zero episodes")]
    NoEpisodes,

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("frame {frame} is out of range; valid frames are 0..={last}")]
    FrameOutOfRange { frame: usize, last: usize },

    #[error("trace has no steps to render")]
    EmptyTrace,

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
