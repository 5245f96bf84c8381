use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("empty subgraph request")]
    EmptySubgraph,

    #[error("{name} = {value} is out of range: {expected}")]
    Range {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("graph not connected; extract a component first")]
    NotConnected,

    #[error("power-law fit needs at least 3 usable points, found {0}")]
    TooFewFitPoints(usize),

    #[error("density too high for ring lattice (k = {k}, n = {n})")]
    DensityTooHigh { n: usize, k: usize },

    #[error("invalid lattice spec: {0}")]
    LatticeSpec(String),

    #[error("unknown {kind}: {name}")]
    Lookup { kind: &'static str, name: String },

    #[error("{path}: column '{column}' not found in header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 = configuration / schema / usage, 3 = I/O, 4 = analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::MissingColumn { .. } | Error::Range { .. } => 2,
            Error::Io { .. } | Error::Csv { .. } | Error::Json(_) => 3,
            _ => 4,
        }
    }
}
