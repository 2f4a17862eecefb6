use std::path::PathBuf;

/// Errors produced by graph construction, fitting and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node id {id} out of range (n = {n})")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("feature id {id} out of range (m = {m})")]
    FeatureOutOfRange { id: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot sample {needed} distinct non-arc pairs: only {available} available")]
    InfeasibleSampling { needed: u64, available: u64 },

    #[error("example has an empty feature set on one side")]
    EmptyFeatureSet,

    #[error("no positive examples")]
    NoPositives,

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
