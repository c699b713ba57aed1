use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use super::AudioError;
use crate::store::{ResultStore, Value};

/// Header names for the four required dataset columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub reference: String,
    pub degraded: String,
    pub codec: String,
    pub mos: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            reference: "ref".into(),
            degraded: "deg".into(),
            codec: "codec".into(),
            mos: "mos".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub ref_path: String,
    pub deg_path: String,
    pub codec: String,
    pub mos: f64,
}

/// One metric value for one dataset row.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreCell {
    Value(f64),
    /// Error kind token of the failure that prevented scoring.
    Error(String),
}

impl ScoreCell {
    pub fn value(&self) -> Option<f64> {
        match self {
            ScoreCell::Value(v) => Some(*v),
            ScoreCell::Error(_) => None,
        }
    }
}

/// Rows of (reference, degraded, codec, MOS) plus appended per-metric scores.
///
/// The raw CSV records are kept so results can be written back with every
/// original column intact.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    headers: Vec<String>,
    records: Vec<Vec<String>>,
    rows: Vec<DatasetRow>,
    base_dir: PathBuf,
    scores: IndexMap<String, Vec<ScoreCell>>,
}

impl DatasetTable {
    /// Builds a table from in-memory rows using the default column names.
    pub fn from_rows(rows: Vec<DatasetRow>, base_dir: impl Into<PathBuf>) -> Result<Self, AudioError> {
        if rows.is_empty() {
            return Err(AudioError::EmptyDataset);
        }
        let cols = ColumnMap::default();
        let headers = vec![cols.reference, cols.degraded, cols.codec, cols.mos];
        let records = rows
            .iter()
            .map(|r| vec![r.ref_path.clone(), r.deg_path.clone(), r.codec.clone(), r.mos.to_string()])
            .collect();
        for (i, r) in rows.iter().enumerate() {
            check_mos(i, r.mos, &r.mos.to_string())?;
        }
        Ok(Self {
            headers,
            records,
            rows,
            base_dir: base_dir.into(),
            scores: IndexMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[DatasetRow] {
        &self.rows
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn records(&self) -> &[Vec<String>] {
        &self.records
    }

    pub fn mos(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mos).collect()
    }

    /// Resolves a path from the CSV against the CSV's directory.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Per-row view handed to loop iterations: resolved `ref` and `deg` paths,
    /// `codec`, `mos` and the row index `row`.
    pub fn row_store(&self, index: usize) -> ResultStore {
        let row = &self.rows[index];
        let mut s = ResultStore::new();
        s.insert("ref", Value::Text(self.resolve(&row.ref_path).to_string_lossy().into_owned()));
        s.insert("deg", Value::Text(self.resolve(&row.deg_path).to_string_lossy().into_owned()));
        s.insert("codec", Value::Text(row.codec.clone()));
        s.insert("mos", Value::Scalar(row.mos));
        s.insert("row", Value::Integer(index as i64));
        s
    }

    pub fn score_columns(&self) -> impl Iterator<Item = (&str, &[ScoreCell])> {
        self.scores.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn scores(&self, metric: &str) -> Option<&[ScoreCell]> {
        self.scores.get(metric).map(Vec::as_slice)
    }

    /// Appends (or replaces) a metric column. Must have one cell per row.
    pub fn set_scores(&mut self, metric: impl Into<String>, cells: Vec<ScoreCell>) -> Result<(), AudioError> {
        let name = metric.into();
        if cells.len() != self.rows.len() {
            return Err(AudioError::ScoreLength {
                name,
                got: cells.len(),
                rows: self.rows.len(),
            });
        }
        self.scores.insert(name, cells);
        Ok(())
    }
}

fn check_mos(row: usize, mos: f64, raw: &str) -> Result<(), AudioError> {
    if (1.0..=5.0).contains(&mos) {
        Ok(())
    } else {
        Err(AudioError::BadMos {
            row,
            value: raw.to_string(),
        })
    }
}

/// Reads a dataset CSV (UTF-8, header row required). Audio paths are later
/// resolved relative to the CSV's directory.
pub fn load_dataset(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<DatasetTable, AudioError> {
    let path = path.as_ref();
    let csv_err = |detail: String| AudioError::Csv {
        path: path.to_path_buf(),
        detail,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AudioError::MissingColumn(name.to_string()))
    };
    let (ci_ref, ci_deg, ci_codec, ci_mos) = (
        col(&columns.reference)?,
        col(&columns.degraded)?,
        col(&columns.codec)?,
        col(&columns.mos)?,
    );

    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        let get = |c: usize| fields.get(c).cloned().unwrap_or_default();
        let raw_mos = get(ci_mos);
        let mos: f64 = raw_mos.parse().map_err(|_| AudioError::BadMos {
            row: i,
            value: raw_mos.clone(),
        })?;
        check_mos(i, mos, &raw_mos)?;
        rows.push(DatasetRow {
            ref_path: get(ci_ref),
            deg_path: get(ci_deg),
            codec: get(ci_codec),
            mos,
        });
        records.push(fields);
    }
    if rows.is_empty() {
        return Err(AudioError::EmptyDataset);
    }
    let base_dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    Ok(DatasetTable {
        headers,
        records,
        rows,
        base_dir,
        scores: IndexMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_file(body: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data.csv");
        std::fs::write(&p, body).unwrap();
        (dir, p)
    }

    #[test]
    fn two_rows() {
        let (_d, p) = csv_file("ref,deg,codec,mos\na.wav,b.wav,opus,4.1\nc.wav,d.wav,amr,2.0\n");
        let t = load_dataset(&p, &ColumnMap::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows()[1].codec, "amr");
        assert_eq!(t.mos(), vec![4.1, 2.0]);
        assert_eq!(t.resolve("a.wav"), p.parent().unwrap().join("a.wav"));
    }

    #[test]
    fn out_of_range_mos() {
        let (_d, p) = csv_file("ref,deg,codec,mos\na,b,c,4\na,b,c,7.2\n");
        assert_eq!(
            load_dataset(&p, &ColumnMap::default()).unwrap_err(),
            AudioError::BadMos {
                row: 1,
                value: "7.2".into()
            }
        );
    }

    #[test]
    fn missing_column() {
        let (_d, p) = csv_file("ref,codec,mos\na,c,4\n");
        assert_eq!(
            load_dataset(&p, &ColumnMap::default()).unwrap_err(),
            AudioError::MissingColumn("deg".into())
        );
    }

    #[test]
    fn header_only_is_empty() {
        let (_d, p) = csv_file("ref,deg,codec,mos\n");
        assert_eq!(load_dataset(&p, &ColumnMap::default()).unwrap_err(), AudioError::EmptyDataset);
    }

    #[test]
    fn custom_column_names_and_extra_columns() {
        let (_d, p) = csv_file("clean,noisy,system,score,note\nx,y,z,3.5,hello\n");
        let cols = ColumnMap {
            reference: "clean".into(),
            degraded: "noisy".into(),
            codec: "system".into(),
            mos: "score".into(),
        };
        let t = load_dataset(&p, &cols).unwrap();
        assert_eq!(t.headers().len(), 5);
        assert_eq!(t.rows()[0].deg_path, "y");
    }

    #[test]
    fn score_columns_need_one_cell_per_row() {
        let (_d, p) = csv_file("ref,deg,codec,mos\na,b,c,4\n");
        let mut t = load_dataset(&p, &ColumnMap::default()).unwrap();
        assert!(t.set_scores("m", vec![]).is_err());
        t.set_scores("m", vec![ScoreCell::Value(1.0)]).unwrap();
        assert_eq!(t.scores("m").unwrap().len(), 1);
    }
}
