use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown node {0}")]
    NotFound(NodeId),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("oracle divergence at t={t} on edge ({u}, {v}): {detail}")]
    OracleDivergence {
        t: usize,
        u: NodeId,
        v: NodeId,
        detail: String,
    },

    #[error("config {config_index}, trial {trial_index}: {source}")]
    Trial {
        config_index: usize,
        trial_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
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
}
