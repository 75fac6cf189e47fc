use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scan: {0}")]
    InvalidScan(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("scan has {found} points, need at least {needed}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("empty scan")]
    EmptyScan,

    #[error(
        "hypothesis generation gave up after {attempts} failed attempts with {generated} of {requested} hypotheses"
    )]
    GenerationStalled {
        attempts: usize,
        generated: usize,
        requested: usize,
    },

    #[error("no hypotheses to cluster")]
    NoHypotheses,

    #[error("every cluster lost its support during refinement")]
    AllClustersDead,

    #[error("no clusters to weight")]
    NoClusters,

    #[error("config: {0}")]
    Config(String),

    #[error("benchmark source yields no scan pairs")]
    NoPairs,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// An I/O failure attributed to `path`.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
