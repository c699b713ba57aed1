use thiserror::Error;

use crate::audio::AudioError;
use crate::config::ConfigError;
use crate::dsp::DspError;
use crate::metrics::MetricError;
use crate::outputs::OutputError;
use crate::store::StoreError;

/// Errors raised while compiling node specs into a [`PipelineGraph`](super::PipelineGraph).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node '{id}' has unknown type '{node_type}'{}", suggestion_suffix(.suggestion))]
    UnknownNodeType {
        id: String,
        node_type: String,
        suggestion: Option<String>,
    },
    #[error("node '{parent}' lists child '{missing}', which is not defined")]
    DanglingChild { parent: String, missing: String },
    #[error("node id '{0}' is defined more than once")]
    DuplicateId(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("root node '{0}' is not defined")]
    MissingRoot(String),
    #[error("node '{id}' is missing required parameter '{param}'")]
    MissingParam { id: String, param: String },
    #[error("node '{id}' has invalid parameter '{param}': {reason}")]
    InvalidParam {
        id: String,
        param: String,
        reason: String,
    },
    #[error("in sub-pipeline of '{id}': {source}")]
    Nested {
        id: String,
        #[source]
        source: Box<GraphError>,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn suggestion_suffix(suggestion: &Option<String>) -> String {
    match suggestion {
        Some(s) => format!(" (did you mean '{s}'?)"),
        None => String::new(),
    }
}

impl GraphError {
    /// Strips `Nested` wrappers.
    pub fn innermost(&self) -> &GraphError {
        match self {
            GraphError::Nested { source, .. } => source.innermost(),
            other => other,
        }
    }
}

/// Failure reported by a node's `execute`.
#[derive(Debug, Error)]
pub enum NodeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("iterable '{0}' is missing or is not a list")]
    MissingIterable(String),
    #[error("sink expected {expected} invocations but was invoked again")]
    InvocationOverflow { expected: usize },
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Nested(Box<ExecError>),
}

impl NodeError {
    /// Short error-kind token, used for failed dataset cells (`ERROR:<kind>`).
    pub fn kind(&self) -> &'static str {
        match self {
            NodeError::Store(e) => e.kind(),
            NodeError::Audio(e) => e.kind(),
            NodeError::Dsp(e) => e.kind(),
            NodeError::Metric(e) => e.kind(),
            NodeError::Output(e) => e.kind(),
            NodeError::MissingIterable(_) => "MissingIterable",
            NodeError::InvocationOverflow { .. } => "InvocationOverflow",
            NodeError::Failed(_) => "NodeFailure",
            NodeError::Nested(e) => e.kind(),
        }
    }
}

/// A run aborted because a node failed. `path` lists the node ids from the
/// outermost pipeline down to the failing node.
#[derive(Debug, Error)]
#[error("node '{}' failed: {source}", .path.join("/"))]
pub struct ExecError {
    pub path: Vec<String>,
    #[source]
    pub source: NodeError,
}

impl ExecError {
    pub(crate) fn at(id: &str, err: NodeError) -> Self {
        match err {
            NodeError::Nested(inner) => {
                let mut path = vec![id.to_string()];
                path.extend(inner.path);
                ExecError {
                    path,
                    source: inner.source,
                }
            }
            source => ExecError {
                path: vec![id.to_string()],
                source,
            },
        }
    }

    pub fn node_id(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or_default()
    }

    pub fn kind(&self) -> &'static str {
        self.source.kind()
    }
}
