//! Result artifacts: scored CSV, correlation table and scatter plots.

pub mod nodes;
mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use thiserror::Error;

use crate::audio::{DatasetTable, ScoreCell};
use crate::metrics::{pearson, spearman, MetricError};

pub use svg::{render_scatter_svg, scatter_svg_text, PALETTE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutputError {
    #[error("cannot write {}: {detail}", .path.display())]
    Io { path: PathBuf, detail: String },
    #[error("dataset has no score columns")]
    NoScoreColumns,
    #[error("correlation report is empty")]
    EmptyReport,
    #[error("dataset has no score column '{0}'")]
    MissingMetricColumn(String),
    #[error("cannot correlate '{metric}' with MOS: {source}")]
    Correlation { metric: String, source: MetricError },
}

impl OutputError {
    pub fn kind(&self) -> &'static str {
        match self {
            OutputError::Io { .. } => "IoError",
            OutputError::NoScoreColumns => "NoScoreColumns",
            OutputError::EmptyReport => "EmptyReport",
            OutputError::MissingMetricColumn(_) => "MissingMetricColumn",
            OutputError::Correlation { .. } => "CorrelationError",
        }
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    let io = |e: std::io::Error| OutputError::Io {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Text of a score cell: shortest round-trip decimal, or `ERROR:<kind>`.
pub fn cell_text(cell: &ScoreCell) -> String {
    match cell {
        ScoreCell::Value(v) => format!("{v}"),
        ScoreCell::Error(kind) => format!("ERROR:{kind}"),
    }
}

/// CSV text: every original column followed by one column per metric.
pub fn results_csv_text(table: &DatasetTable) -> Result<String, OutputError> {
    if table.score_columns().next().is_none() {
        return Err(OutputError::NoScoreColumns);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = table
        .headers()
        .iter()
        .map(String::as_str)
        .chain(table.score_columns().map(|(name, _)| name))
        .collect();
    let to_err = |e: csv::Error| OutputError::Io {
        path: PathBuf::from("<csv>"),
        detail: e.to_string(),
    };
    w.write_record(&header).map_err(to_err)?;
    for (i, record) in table.records().iter().enumerate() {
        let mut row = record.clone();
        row.resize(table.headers().len(), String::new());
        row.extend(table.score_columns().map(|(_, cells)| cell_text(&cells[i])));
        w.write_record(&row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Io {
        path: PathBuf::from("<csv>"),
        detail: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_results_csv(table: &DatasetTable, path: impl AsRef<Path>) -> Result<(), OutputError> {
    write_file(path.as_ref(), &results_csv_text(table)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
}

/// Per-metric correlation against MOS, keyed by metric name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub metrics: IndexMap<String, Correlation>,
}

impl CorrelationReport {
    /// Correlates every score column with MOS over the rows that have a value.
    pub fn from_table(table: &DatasetTable) -> Result<Self, OutputError> {
        let mos = table.mos();
        let mut metrics = IndexMap::new();
        for (name, cells) in table.score_columns() {
            let (x, y): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .zip(&mos)
                .filter_map(|(c, m)| c.value().map(|v| (*m, v)))
                .unzip();
            let wrap = |source| OutputError::Correlation {
                metric: name.to_string(),
                source,
            };
            metrics.insert(
                name.to_string(),
                Correlation {
                    pearson: pearson(&x, &y).map_err(wrap)?,
                    spearman: spearman(&x, &y).map_err(wrap)?,
                    n: x.len(),
                },
            );
        }
        Ok(Self { metrics })
    }
}

/// Fixed three-decimal formatting with round-half-to-even on the exact
/// binary value. Negative zero prints as `0.000`.
pub fn fmt3(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = format!("{:.60}", x.abs());
    let (int_part, frac) = digits.split_once('.').expect("fixed-point output");
    let mut kept: Vec<u8> = int_part.bytes().chain(frac.bytes().take(3)).map(|b| b - b'0').collect();
    let rest = &frac.as_bytes()[3..];
    let round_up = match rest.first().map(|b| b - b'0') {
        Some(d) if d > 5 => true,
        Some(5) => rest[1..].iter().any(|b| *b != b'0') || kept.last().is_some_and(|d| d % 2 == 1),
        _ => false,
    };
    if round_up {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let split = kept.len() - 3;
    let mut out = String::new();
    let is_zero = kept.iter().all(|d| *d == 0);
    if x.is_sign_negative() && !is_zero {
        out.push('-');
    }
    for (i, d) in kept.iter().enumerate() {
        if i == split {
            out.push('.');
        }
        out.push((b'0' + d) as char);
    }
    out
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '&' | '%' | '$' | '#' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// A `tabular` with one row per metric in alphabetical order.
pub fn render_latex_table(report: &CorrelationReport) -> Result<String, OutputError> {
    if report.metrics.is_empty() {
        return Err(OutputError::EmptyReport);
    }
    let mut names: Vec<&String> = report.metrics.keys().collect();
    names.sort();
    let mut out = String::new();
    out.push_str("\\begin{tabular}{lrrr}\n\\hline\n");
    out.push_str("Metric & Pearson & Spearman & N \\\\\n\\hline\n");
    for name in names {
        let c = &report.metrics[name];
        let _ = writeln!(
            out,
            "{} & {} & {} & {} \\\\",
            latex_escape(name),
            fmt3(c.pearson),
            fmt3(c.spearman),
            c.n
        );
    }
    out.push_str("\\hline\n\\end{tabular}\n");
    Ok(out)
}
