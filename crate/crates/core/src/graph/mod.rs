//! Node execution contract, DAG compilation, and the depth-first executor.

mod build;
mod error;
pub mod nodes;
mod registry;
mod spec;
mod traverse;

use std::any::Any;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use build::{build_graph, build_graph_in, check_structure, validate_specs, GraphNode, PipelineGraph};
pub use error::{ExecError, GraphError, NodeError};
pub use registry::{BuildContext, Constructor, Registry};
pub use spec::{NodeSpec, Params};
pub use traverse::{traverse, traverse_with};

use crate::store::{ResultStore, Value};

/// What a node tells the executor after running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecOutcome {
    /// Proceed into this node's children.
    Continue,
    /// Skip this node's children; siblings still run.
    Halt,
}

/// An executable pipeline node.
///
/// Nodes are immutable once built. Anything that must persist across
/// invocations within one run (sink counters, for instance) lives in the
/// [`RunContext`] via [`RunContext::node_state`].
pub trait Node: Send + Sync {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError>;

    /// The compiled sub-pipeline this node wraps, if any.
    fn subgraph(&self) -> Option<&PipelineGraph> {
        None
    }
}

/// Writes `value` under the node's output key; nodes without one write nothing.
pub fn emit(store: &mut ResultStore, output_key: &Option<String>, value: Value) {
    if let Some(key) = output_key {
        store.insert(key.clone(), value);
    }
}

/// Settings shared by every node in a run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    /// Where output nodes write relative file names.
    pub out_dir: PathBuf,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
        }
    }
}

/// Mutable per-run state: visit trace and per-node state slots.
pub struct RunContext {
    settings: Arc<RunSettings>,
    scope: String,
    current: String,
    visits: Vec<String>,
    state: HashMap<String, Box<dyn Any + Send>>,
}

impl Default for RunContext {
    fn default() -> Self {
        Self::new(RunSettings::default())
    }
}

impl RunContext {
    pub fn new(settings: RunSettings) -> Self {
        Self {
            settings: Arc::new(settings),
            scope: String::new(),
            current: String::new(),
            visits: Vec::new(),
            state: HashMap::new(),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.settings.out_dir
    }

    /// Scoped ids of every node executed so far, in execution order.
    /// Nested nodes appear as `outer/inner`; loop iterations as `loop[3]/inner`.
    pub fn visits(&self) -> &[String] {
        &self.visits
    }

    pub fn visit_count(&self) -> usize {
        self.visits.len()
    }

    /// Scoped id of the node currently executing.
    pub fn current(&self) -> &str {
        &self.current
    }

    /// State slot owned by the currently executing node, created on first use.
    pub fn node_state<T: Default + Send + 'static>(&mut self) -> &mut T {
        let slot = self
            .state
            .entry(self.current.clone())
            .or_insert_with(|| Box::new(T::default()));
        if !slot.is::<T>() {
            *slot = Box::new(T::default());
        }
        slot.downcast_mut::<T>().expect("slot type checked above")
    }

    pub(crate) fn enter(&mut self, id: &str) {
        self.current = format!("{}{}", self.scope, id);
        self.visits.push(self.current.clone());
    }

    /// Runs `f` with the scope extended by the current node, for nested pipelines
    /// that share this run's state.
    pub fn nested<R>(&mut self, f: impl FnOnce(&mut Self) -> R) -> R {
        let saved_scope = std::mem::replace(&mut self.scope, format!("{}/", self.current));
        let saved_current = self.current.clone();
        let out = f(self);
        self.scope = saved_scope;
        self.current = saved_current;
        out
    }

    /// A fresh context for one loop iteration: same settings, empty state.
    pub fn fork(&self, label: &str) -> RunContext {
        RunContext {
            settings: Arc::clone(&self.settings),
            scope: format!("{}[{}]/", self.current, label),
            current: String::new(),
            visits: Vec::new(),
            state: HashMap::new(),
        }
    }

    /// Appends a forked context's visit trace.
    pub fn absorb(&mut self, child: RunContext) {
        self.visits.extend(child.visits);
    }
}
