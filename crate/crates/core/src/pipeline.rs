//! Glue from a config file on disk to a compiled, runnable pipeline.

use std::fmt;
use std::path::Path;

use crate::config::{self, ConfigError, ResolvedDocument};
use crate::graph::{
    build_graph_in, traverse_with, validate_specs, BuildContext, ExecError, GraphError,
    PipelineGraph, Registry, RunContext, RunSettings,
};
use crate::store::ResultStore;

/// Default root node id.
pub const DEFAULT_ROOT: &str = "root";

/// Deserializes a resolved document and compiles it rooted at `root_id`.
pub fn compile_resolved(
    resolved: &ResolvedDocument,
    root_id: &str,
    registry: &Registry,
) -> Result<PipelineGraph, GraphError> {
    let specs = config::deserialize(&resolved.document)?;
    let ctx = BuildContext::for_document(registry, resolved);
    build_graph_in(&specs, root_id, &ctx)
}

/// A compiled pipeline together with the document it came from.
#[derive(Debug)]
pub struct Pipeline {
    pub document: ResolvedDocument,
    pub graph: PipelineGraph,
}

/// Why loading a pipeline failed.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Outcome of a run: the final store and the visit trace.
#[derive(Debug)]
pub struct RunReport {
    pub store: ResultStore,
    pub visits: Vec<String>,
}

impl Pipeline {
    /// Loads `path`, resolves includes, and compiles from `root_id`.
    pub fn load(path: impl AsRef<Path>, root_id: &str, registry: &Registry) -> Result<Self, LoadError> {
        let document = config::load_resolved(path)?;
        let graph = compile_resolved(&document, root_id, registry).map_err(|e| match e {
            GraphError::Config(c) => LoadError::Config(c),
            other => LoadError::Graph(other),
        })?;
        Ok(Self { document, graph })
    }

    /// Executes the pipeline on `store`. On failure the partial trace is
    /// returned alongside the error.
    pub fn run(&self, store: ResultStore, settings: RunSettings) -> Result<RunReport, (ExecError, Vec<String>)> {
        let mut store = store;
        let mut ctx = RunContext::new(settings);
        match traverse_with(&self.graph, &mut store, &mut ctx) {
            Ok(()) => Ok(RunReport {
                store,
                visits: ctx.visits().to_vec(),
            }),
            Err(e) => Err((e, ctx.visits().to_vec())),
        }
    }
}

/// One problem found by static validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    Config(ConfigError),
    Graph(GraphError),
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Config(e) => e.fmt(f),
            Finding::Graph(e) => e.fmt(f),
        }
    }
}

/// Static validation with zero execution: parse, entry schema, includes,
/// registry, DAG structure and node parameters. Reports every finding it can.
pub fn validate(path: impl AsRef<Path>, root_id: &str, registry: &Registry) -> Vec<Finding> {
    let doc = match config::load_document(path) {
        Ok(d) => d,
        Err(e) => return vec![Finding::Config(e)],
    };
    let (specs, entry_errors) = config::deserialize_all(&doc);
    let declared: Vec<String> = doc.ids().map(str::to_string).collect();
    let mut findings: Vec<Finding> = entry_errors.into_iter().map(Finding::Config).collect();
    let resolved = match config::resolve_encapsulations(doc, &[]) {
        Ok(r) => r,
        Err(e) => {
            findings.push(Finding::Config(e));
            return findings;
        }
    };
    let ctx = BuildContext::for_document(registry, &resolved);
    findings.extend(
        validate_specs(&specs, root_id, &ctx)
            .into_iter()
            // Children pointing at entries that failed to deserialize are already reported.
            .filter(|e| !matches!(e, GraphError::DanglingChild { missing, .. } if declared.contains(missing)))
            .filter(|e| !matches!(e, GraphError::MissingRoot(r) if declared.contains(r)))
            .map(Finding::Graph),
    );
    findings
}
