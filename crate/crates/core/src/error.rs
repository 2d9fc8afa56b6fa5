use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("window must be at least one sample")]
    InvalidWindow,
    #[error("channel {index} out of range ({channels} channels)")]
    ChannelOutOfRange { index: usize, channels: usize },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("invalid controller config: {0}")]
    InvalidConfig(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("position {value} outside stroke [{min}, {max}]")]
    OutOfStroke { value: f64, min: f64, max: f64 },
    #[error("expanded chamber volume is zero at the rest position")]
    DegenerateVolume,
    #[error("linkage has no real assembly: {0}")]
    LinkageInfeasible(String),
    #[error("striker inertia must be positive, got {0}")]
    InvalidInertia(f64),

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),

    #[error("pooled proportion is {0}; z statistic undefined")]
    DegenerateProportions(f64),
    #[error("p-value {0} outside (0, 1]")]
    InvalidP(f64),
    #[error("comparison count {m} smaller than number of p-values {count}")]
    InvalidComparisons { m: usize, count: usize },
    #[error("invalid trial table: {0}")]
    InvalidTable(String),

    #[error("trace has {available} samples, simulation needs {required}")]
    TraceTooShort { required: usize, available: usize },
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("overlapping segments on channel {channel}")]
    OverlapError { channel: usize },
    #[error("invalid EMG profile: {0}")]
    InvalidProfile(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
