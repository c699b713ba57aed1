use std::path::PathBuf;

use super::{load_audio, load_dataset, ColumnMap, DEFAULT_RATE};
use crate::graph::{emit, BuildContext, ExecOutcome, GraphError, Node, NodeError, NodeSpec, RunContext};
use crate::store::{ResultStore, Value};

/// Loads the dataset CSV given by `csv` (relative to the config file).
pub struct LoadDatasetNode {
    path: PathBuf,
    columns: ColumnMap,
    output_key: Option<String>,
}

impl Node for LoadDatasetNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let table = load_dataset(&self.path, &self.columns)?;
        tracing::info!(rows = table.len(), path = %self.path.display(), "dataset loaded");
        emit(store, &self.output_key, Value::Table(table));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_load_dataset(spec: &NodeSpec, ctx: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let mut columns = ColumnMap::default();
    if let Some(map) = p.opt_str_map("columns")? {
        for (k, v) in map {
            match k.as_str() {
                "ref" => columns.reference = v,
                "deg" => columns.degraded = v,
                "codec" => columns.codec = v,
                "mos" => columns.mos = v,
                other => return Err(p.invalid("columns", format!("unknown column role '{other}'"))),
            }
        }
    }
    Ok(Box::new(LoadDatasetNode {
        path: ctx.resolve_path(&p.str("csv")?),
        columns,
        output_key: spec.output_key.clone(),
    }))
}

/// Loads a single audio file.
pub struct LoadAudioNode {
    path: PathBuf,
    rate: u32,
    output_key: Option<String>,
}

impl Node for LoadAudioNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let sig = load_audio(&self.path, self.rate)?;
        emit(store, &self.output_key, Value::Signal(sig));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_load_audio(spec: &NodeSpec, ctx: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    Ok(Box::new(LoadAudioNode {
        path: ctx.resolve_path(&p.str("file")?),
        rate: positive_rate(spec)?,
        output_key: spec.output_key.clone(),
    }))
}

/// Loads the reference/degraded pair named by a dataset row and writes them
/// as a nested store `{ref, deg}`.
pub struct LoadPairNode {
    row_key: String,
    rate: u32,
    output_key: Option<String>,
}

impl Node for LoadPairNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let row = store.store(&self.row_key)?;
        let reference = load_audio(row.text("ref")?, self.rate)?;
        let degraded = load_audio(row.text("deg")?, self.rate)?;
        let mut pair = ResultStore::new();
        pair.insert("ref", Value::Signal(reference));
        pair.insert("deg", Value::Signal(degraded));
        emit(store, &self.output_key, Value::Store(pair));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_load_pair(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    Ok(Box::new(LoadPairNode {
        row_key: spec.params().str_or("row", "item")?,
        rate: positive_rate(spec)?,
        output_key: spec.output_key.clone(),
    }))
}

fn positive_rate(spec: &NodeSpec) -> Result<u32, GraphError> {
    let p = spec.params();
    match p.u32_or("rate", DEFAULT_RATE)? {
        0 => Err(p.invalid("rate", "must be positive")),
        r => Ok(r),
    }
}
