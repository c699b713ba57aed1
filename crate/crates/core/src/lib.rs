//! Node-based dataflow engine for benchmarking full-reference audio quality
//! metrics.
//!
//! Pipelines are JSON documents compiled into a [`PipelineGraph`] and run by
//! a stack-based depth-first traversal over a shared [`ResultStore`].

pub mod audio;
pub mod catalog;
pub mod config;
pub mod corpus;
pub mod dsp;
pub mod graph;
pub mod metrics;
pub mod outputs;
pub mod pipeline;
pub mod store;
pub mod viz;

#[cfg(test)]
mod oracles;

pub use audio::{load_audio, load_dataset, AudioError, DatasetTable, ScoreCell, Signal};
pub use config::{load_document, ConfigError, PipelineDocument};
pub use dsp::{DspError, FeatureMatrix, VadMask};
pub use graph::{
    build_graph, traverse, ExecError, ExecOutcome, GraphError, Node, NodeError, NodeSpec, PipelineGraph, Registry,
    RunContext, RunSettings,
};
pub use metrics::{MetricError, MetricResult, PatchScore};
pub use outputs::{CorrelationReport, OutputError};
pub use pipeline::{Pipeline, DEFAULT_ROOT};
pub use store::{ResultStore, StoreError, Value};
pub use viz::{parse_dot, to_dot, DotDocument};
