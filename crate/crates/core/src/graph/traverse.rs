use std::time::Instant;

use super::{ExecError, ExecOutcome, PipelineGraph, RunContext};
use crate::store::ResultStore;

/// Runs `graph` from its root with a fresh [`RunContext`] and returns the final store.
pub fn traverse(graph: &PipelineGraph, store: ResultStore) -> Result<ResultStore, ExecError> {
    let mut store = store;
    let mut ctx = RunContext::default();
    traverse_with(graph, &mut store, &mut ctx)?;
    Ok(store)
}

/// Stack-driven depth-first traversal.
///
/// Children are pushed in reverse so they pop in declared order. A node that
/// returns [`ExecOutcome::Halt`] has its children skipped. There is no visited
/// set: a node reachable through several parents runs once per arrival.
pub fn traverse_with(
    graph: &PipelineGraph,
    store: &mut ResultStore,
    ctx: &mut RunContext,
) -> Result<(), ExecError> {
    let mut stack: Vec<&str> = vec![graph.root_id()];
    while let Some(id) = stack.pop() {
        let node = graph.node(id).expect("compiled graphs have no dangling ids");
        ctx.enter(id);
        let started = Instant::now();
        let outcome = node
            .exec
            .execute(store, ctx)
            .map_err(|e| ExecError::at(id, e))?;
        tracing::debug!(
            node = ctx.current(),
            node_type = node.spec.node_type.as_str(),
            elapsed_ms = started.elapsed().as_secs_f64() * 1e3,
            halted = outcome == ExecOutcome::Halt,
            "node executed"
        );
        if outcome == ExecOutcome::Halt {
            continue;
        }
        stack.extend(node.spec.children.iter().rev().map(String::as_str));
    }
    Ok(())
}
