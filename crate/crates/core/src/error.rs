use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown region `{0}` (expected `rect80` or `classroom`)")]
    UnknownRegion(String),

    #[error("unknown protocol `{0}` (expected `beecup`, `leach` or `sep`)")]
    UnknownProtocol(String),

    #[error("{which} weights must sum to 1 (got {sum})")]
    WeightSum { which: &'static str, sum: f64 },

    #[error("timing: {0}")]
    Timing(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("solution dimension {got} does not match {expected} alive nodes")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate cluster head id {0} in solution")]
    DuplicateHead(usize),

    #[error("requested {requested} cluster heads but only {alive} nodes are alive")]
    TooManyHeads { requested: usize, alive: usize },

    #[error("optimization problem has an empty search space")]
    EmptyUniverse,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for errors caused by bad user configuration (as opposed to I/O).
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv { .. })
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
