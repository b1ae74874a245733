use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("self-loop query on mention `{0}`")]
    SelfLoop(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Ingest {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid record `{id}`: {message}")]
    Record { id: String, message: String },

    #[error("gold label of mention `{mention}` references missing entity `{entity}`")]
    Integrity { mention: String, entity: String },

    #[error("duplicate edge {source_id} -> {target} with conflicting scores {first} and {second}")]
    DuplicateEdge {
        source_id: String,
        target: String,
        first: f64,
        second: f64,
    },

    #[error("invalid affinity edge {source_id} -> {target}: {message}")]
    InvalidEdge {
        source_id: String,
        target: String,
        message: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

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

    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownId { .. }
                | Error::Ingest { .. }
                | Error::Record { .. }
                | Error::Integrity { .. }
                | Error::DuplicateEdge { .. }
                | Error::InvalidEdge { .. }
                | Error::Evaluation(_)
        )
    }
}
