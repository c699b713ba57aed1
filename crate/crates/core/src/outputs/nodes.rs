use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use super::{render_latex_table, render_scatter_svg, write_file, write_results_csv, CorrelationReport};
use crate::audio::ScoreCell;
use crate::graph::{emit, BuildContext, ExecOutcome, GraphError, Node, NodeError, NodeSpec, RunContext};
use crate::store::{ResultStore, StoreError, Value};

fn out_path(ctx: &RunContext, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        ctx.out_dir().join(p)
    }
}

/// Copies per-row metric values from loop results into the dataset table.
///
/// `metrics` maps score column name to a dotted path inside each iteration
/// store. An iteration that failed, or lacks the value, gets an error cell.
pub struct AttachScoresNode {
    results: String,
    dataset: String,
    metrics: IndexMap<String, String>,
    output_key: Option<String>,
}

impl AttachScoresNode {
    fn cell(iteration: Option<&ResultStore>, path: &str) -> ScoreCell {
        let Some(it) = iteration else {
            return ScoreCell::Error("MissingKey".into());
        };
        match it.get_path(path).ok().and_then(Value::as_f64) {
            Some(v) if v.is_finite() => ScoreCell::Value(v),
            Some(_) => ScoreCell::Error("NonFinite".into()),
            None => match it.text("error_kind") {
                Ok(kind) => ScoreCell::Error(kind.to_string()),
                Err(_) => ScoreCell::Error("MissingKey".into()),
            },
        }
    }
}

impl Node for AttachScoresNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let mut table = store.table(&self.dataset)?.clone();
        let results = store.store(&self.results)?;
        for (column, path) in &self.metrics {
            let cells = (0..table.len())
                .map(|i| Self::cell(results.store(&i.to_string()).ok(), path))
                .collect();
            table.set_scores(column.clone(), cells)?;
        }
        emit(store, &self.output_key, Value::Table(table));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_attach_scores(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let metrics = p.opt_str_map("metrics")?.ok_or_else(|| p.missing("metrics"))?;
    if metrics.is_empty() {
        return Err(p.invalid("metrics", "needs at least one column"));
    }
    Ok(Box::new(AttachScoresNode {
        results: p.str_or("results", "results")?,
        dataset: p.str_or("dataset", "dataset")?,
        metrics,
        output_key: spec.output_key.clone(),
    }))
}

/// Writes the scored dataset CSV into the run's output directory.
pub struct WriteCsvNode {
    input: String,
    file: String,
}

impl Node for WriteCsvNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let path = out_path(ctx, &self.file);
        write_results_csv(store.table(&self.input)?, &path)?;
        tracing::info!(path = %path.display(), "results written");
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_write_csv(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    Ok(Box::new(WriteCsvNode {
        input: p.str_or("input", "scored")?,
        file: p.str_or("file", "results.csv")?,
    }))
}

/// Writes the Pearson/Spearman table of every score column against MOS.
pub struct LatexTableNode {
    input: String,
    file: String,
}

impl Node for LatexTableNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let report = CorrelationReport::from_table(store.table(&self.input)?)?;
        write_file(&out_path(ctx, &self.file), &render_latex_table(&report)?)?;
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_latex_table(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    Ok(Box::new(LatexTableNode {
        input: p.str_or("input", "scored")?,
        file: p.str_or("file", "correlations.tex")?,
    }))
}

/// One scatter SVG per metric; `{metric}` in `file` is replaced by the name.
pub struct ScatterSvgNode {
    input: String,
    metrics: Option<Vec<String>>,
    file: String,
}

impl Node for ScatterSvgNode {
    fn execute(&self, store: &mut ResultStore, ctx: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let table = store.table(&self.input)?;
        let names: Vec<String> = match &self.metrics {
            Some(m) => m.clone(),
            None => table.score_columns().map(|(n, _)| n.to_string()).collect(),
        };
        if names.is_empty() {
            return Err(StoreError::MissingKey(format!("{}: score columns", self.input)).into());
        }
        for name in names {
            let file = self.file.replace("{metric}", &name);
            render_scatter_svg(table, &name, out_path(ctx, &file))?;
        }
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_scatter_svg(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let metrics = p.opt_str_list("metrics")?;
    let file = p.str_or("file", "scatter_{metric}.svg")?;
    if !file.contains("{metric}") && metrics.as_ref().is_none_or(|m| m.len() != 1) {
        return Err(p.invalid("file", "must contain '{metric}' unless exactly one metric is listed"));
    }
    Ok(Box::new(ScatterSvgNode {
        input: p.str_or("input", "scored")?,
        metrics,
        file,
    }))
}
