use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node id {node} out of range for a graph with {n} nodes")]
    InvalidNode { node: NodeId, n: usize },

    #[error("graph must have at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("node {node} has invalid delay {delay}; delays must be finite and positive")]
    InvalidDelay { node: NodeId, delay: f64 },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("budget k={k} out of range for n={n} (need 1 <= k < n)")]
    BudgetOutOfRange { k: usize, n: usize },

    #[error("only {available} nodes with positive delay remain, {requested} requested")]
    NotEnoughCandidates { requested: usize, available: usize },

    #[error("node {0} is already upgraded or has zero delay")]
    AlreadyUpgraded(NodeId),

    #[error("operation requires the uniform delay model (all delays equal to 1)")]
    NonUniform,

    #[error("{what} limit exceeded: {value} > {cap}")]
    CapExceeded { what: &'static str, value: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: duplicate delay entry for '{label}'")]
    DuplicateDelay { path: PathBuf, label: String },

    #[error("{path}: delay given for unknown node '{label}'")]
    UnknownLabel { path: PathBuf, label: String },

    #[error("{path}: no delay entry for node '{label}'")]
    MissingDelay { path: PathBuf, label: String },

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("incremental distance update diverged from recomputation at step {step}")]
    AuditMismatch { step: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Serialize(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by malformed or invalid input data, as opposed to
    /// runtime or configuration failures.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::TooFewNodes(_)
                | Error::SelfLoop(_)
                | Error::InvalidDelay { .. }
                | Error::Disconnected { .. }
                | Error::Parse { .. }
                | Error::DuplicateDelay { .. }
                | Error::UnknownLabel { .. }
                | Error::MissingDelay { .. }
                | Error::InvalidSpec(_)
                | Error::UnknownAlgorithm(_)
                | Error::Io { .. }
        )
    }
}
