//! Control-flow nodes (loop, encapsulation, sink) and a few utility nodes.

use rayon::prelude::*;

use super::{
    emit, traverse_with, BuildContext, ExecOutcome, GraphError, Node, NodeError, NodeSpec,
    PipelineGraph, RunContext,
};
use crate::store::{ResultStore, StoreError, Value};

/// Does nothing and continues.
pub struct IdentityNode;

impl Node for IdentityNode {
    fn execute(&self, _: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_identity(_: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    Ok(Box::new(IdentityNode))
}

/// Always halts, pruning its subtree. Useful for switching off a branch.
pub struct HaltNode;

impl Node for HaltNode {
    fn execute(&self, _: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        Ok(ExecOutcome::Halt)
    }
}

pub fn build_halt(_: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    Ok(Box::new(HaltNode))
}

/// Writes a literal `value` parameter under its output key.
pub struct SetNode {
    value: Value,
    output_key: Option<String>,
}

impl Node for SetNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        emit(store, &self.output_key, self.value.clone());
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_set(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let raw = p.raw("value").ok_or_else(|| p.missing("value"))?;
    let value = Value::from_json(raw).ok_or_else(|| p.invalid("value", "unsupported literal"))?;
    Ok(Box::new(SetNode {
        value,
        output_key: spec.output_key.clone(),
    }))
}

/// Multiplies a numeric value by a constant factor.
pub struct ScaleNode {
    input: String,
    factor: f64,
    output_key: Option<String>,
}

impl Node for ScaleNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let x = store.scalar(&self.input)?;
        emit(store, &self.output_key, Value::Scalar(x * self.factor));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_scale(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    Ok(Box::new(ScaleNode {
        input: p.str("input")?,
        factor: p.f64_or("factor", 1.0)?,
        output_key: spec.output_key.clone(),
    }))
}

/// Runs a sub-pipeline once per entry of an iterable held in the store.
///
/// Each iteration works on its own deep copy of the incoming store with the
/// entry injected under `item_key` and the iteration index under `index_key`.
/// Iteration stores are collected into a nested store keyed `"0"`, `"1"`, ...
/// A failing iteration records `error` and `error_kind` in its own store and
/// the remaining iterations still run; indices of failed iterations are
/// written to `<output_key>_failed`.
pub struct LoopNode {
    iterable_key: String,
    item_key: String,
    index_key: String,
    keep: Option<Vec<String>>,
    parallel: bool,
    output_key: Option<String>,
    body: PipelineGraph,
}

impl LoopNode {
    pub fn new(iterable_key: impl Into<String>, body: PipelineGraph) -> Self {
        Self {
            iterable_key: iterable_key.into(),
            item_key: "item".into(),
            index_key: "index".into(),
            keep: None,
            parallel: false,
            output_key: None,
            body,
        }
    }

    pub fn with_output(mut self, key: impl Into<String>) -> Self {
        self.output_key = Some(key.into());
        self
    }

    pub fn with_item_key(mut self, key: impl Into<String>) -> Self {
        self.item_key = key.into();
        self
    }

    pub fn parallel(mut self, yes: bool) -> Self {
        self.parallel = yes;
        self
    }

    fn items(&self, store: &ResultStore) -> Result<Vec<Value>, NodeError> {
        let missing = || NodeError::MissingIterable(self.iterable_key.clone());
        Ok(match store.get(&self.iterable_key).map_err(|_| missing())? {
            Value::IntList(xs) => xs.iter().map(|&x| Value::Integer(x)).collect(),
            Value::List(xs) => xs.clone(),
            Value::Table(t) => (0..t.len()).map(|i| Value::Store(t.row_store(i))).collect(),
            _ => return Err(missing()),
        })
    }

    fn run_iteration(&self, index: usize, item: Value, base: &ResultStore, mut ctx: RunContext) -> (ResultStore, RunContext, bool) {
        let mut store = base.clone();
        store.insert(self.item_key.clone(), item);
        store.insert(self.index_key.clone(), Value::Integer(index as i64));
        let result = traverse_with(&self.body, &mut store, &mut ctx);
        if let Some(keep) = &self.keep {
            store.retain_keys(keep);
        }
        let failed = match result {
            Ok(()) => false,
            Err(e) => {
                tracing::warn!(iteration = index, error = %e, "loop iteration failed");
                store.insert("error", Value::Text(e.to_string()));
                store.insert("error_kind", Value::Text(e.kind().to_string()));
                true
            }
        };
        (store, ctx, failed)
    }
}

impl Node for LoopNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let items = self.items(store)?;
        let forks: Vec<RunContext> = (0..items.len()).map(|i| ctx.fork(&i.to_string())).collect();
        let jobs = items.into_iter().zip(forks).enumerate();
        let base = &*store;
        let runs: Vec<(ResultStore, RunContext, bool)> = if self.parallel {
            jobs.collect::<Vec<_>>()
                .into_par_iter()
                .map(|(i, (item, fork))| self.run_iteration(i, item, base, fork))
                .collect()
        } else {
            jobs.map(|(i, (item, fork))| self.run_iteration(i, item, base, fork))
                .collect()
        };

        let mut nested = ResultStore::new();
        let mut failed = Vec::new();
        for (i, (iter_store, fork, did_fail)) in runs.into_iter().enumerate() {
            ctx.absorb(fork);
            if did_fail {
                failed.push(i as i64);
            }
            nested.insert(i.to_string(), Value::Store(iter_store));
        }
        if let Some(key) = &self.output_key {
            store.insert(key.clone(), Value::Store(nested));
            store.insert(format!("{key}_failed"), Value::IntList(failed));
        }
        Ok(ExecOutcome::Continue)
    }

    fn subgraph(&self) -> Option<&PipelineGraph> {
        Some(&self.body)
    }
}

pub fn build_loop(spec: &NodeSpec, ctx: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let body = ctx.sub_pipeline(spec)?;
    Ok(Box::new(LoopNode {
        iterable_key: p.str("iterable")?,
        item_key: p.str_or("item_key", "item")?,
        index_key: p.str_or("index_key", "index")?,
        keep: p.opt_str_list("keep")?,
        parallel: p.bool_or("parallel", false)?,
        output_key: spec.output_key.clone(),
        body,
    }))
}

/// Runs a wrapped pipeline against the same store, then continues.
pub struct EncapsulationNode {
    body: PipelineGraph,
}

impl EncapsulationNode {
    pub fn new(body: PipelineGraph) -> Self {
        Self { body }
    }
}

impl Node for EncapsulationNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        ctx.nested(|ctx| traverse_with(&self.body, store, ctx))
            .map_err(|e| NodeError::Nested(Box::new(e)))?;
        Ok(ExecOutcome::Continue)
    }

    fn subgraph(&self) -> Option<&PipelineGraph> {
        Some(&self.body)
    }
}

pub fn build_encapsulation(spec: &NodeSpec, ctx: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    if spec.params().raw("path").is_none() && spec.params().raw("pipeline").is_none() {
        return Err(spec.params().missing("path"));
    }
    Ok(Box::new(EncapsulationNode::new(ctx.sub_pipeline(spec)?)))
}

#[derive(Default)]
struct SinkState {
    invocations: usize,
    captured: ResultStore,
}

/// Gathers results arriving from several branches.
///
/// Each invocation snapshots whichever of `keys` are present. The node halts
/// until it has been invoked `expected` times; the final invocation writes the
/// captured values as a nested store under the output key and continues.
pub struct SinkNode {
    expected: usize,
    keys: Vec<String>,
    output_key: Option<String>,
}

impl SinkNode {
    pub fn new(expected: usize, keys: Vec<String>) -> Self {
        Self {
            expected,
            keys,
            output_key: None,
        }
    }

    pub fn with_output(mut self, key: impl Into<String>) -> Self {
        self.output_key = Some(key.into());
        self
    }
}

impl Node for SinkNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let state = ctx.node_state::<SinkState>();
        if state.invocations >= self.expected {
            return Err(NodeError::InvocationOverflow {
                expected: self.expected,
            });
        }
        state.invocations += 1;
        for key in &self.keys {
            if let Ok(v) = store.get(key) {
                state.captured.insert(key.clone(), v.clone());
            }
        }
        if state.invocations < self.expected {
            return Ok(ExecOutcome::Halt);
        }
        if let Some(missing) = self.keys.iter().find(|k| !state.captured.contains(k)) {
            return Err(StoreError::MissingKey(missing.clone()).into());
        }
        let captured = state.captured.clone();
        emit(store, &self.output_key, Value::Store(captured));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_sink(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let expected = p.opt_usize("expected").transpose().ok_or_else(|| p.missing("expected"))??;
    if expected == 0 {
        return Err(p.invalid("expected", "must be at least 1"));
    }
    Ok(Box::new(SinkNode {
        expected,
        keys: p.opt_str_list("keys")?.unwrap_or_default(),
        output_key: spec.output_key.clone(),
    }))
}
