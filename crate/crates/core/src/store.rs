//! Keyed value store threaded through a pipeline run.

use indexmap::IndexMap;
use thiserror::Error;

use crate::audio::{DatasetTable, Signal};
use crate::dsp::{FeatureMatrix, VadMask};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("key '{0}' is not present in the result store")]
    MissingKey(String),
    #[error("key '{key}' holds a {found}, expected a {expected}")]
    WrongType {
        key: String,
        expected: &'static str,
        found: &'static str,
    },
}

impl StoreError {
    pub fn kind(&self) -> &'static str {
        match self {
            StoreError::MissingKey(_) => "MissingKey",
            StoreError::WrongType { .. } => "WrongType",
        }
    }
}

/// A value held in a [`ResultStore`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Integer(i64),
    Text(String),
    IntList(Vec<i64>),
    List(Vec<Value>),
    Matrix(FeatureMatrix),
    Mask(VadMask),
    Signal(Signal),
    Table(DatasetTable),
    Store(ResultStore),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Integer(_) => "integer",
            Value::Text(_) => "string",
            Value::IntList(_) => "integer list",
            Value::List(_) => "list",
            Value::Matrix(_) => "feature matrix",
            Value::Mask(_) => "VAD mask",
            Value::Signal(_) => "signal",
            Value::Table(_) => "dataset table",
            Value::Store(_) => "nested store",
        }
    }

    /// Converts a JSON literal into a store value. Objects become nested stores.
    pub fn from_json(json: &serde_json::Value) -> Option<Value> {
        use serde_json::Value as J;
        Some(match json {
            J::Number(n) => match n.as_i64() {
                Some(i) => Value::Integer(i),
                None => Value::Scalar(n.as_f64()?),
            },
            J::String(s) => Value::Text(s.clone()),
            J::Bool(b) => Value::Integer(i64::from(*b)),
            J::Array(items) => {
                if items.iter().all(|v| v.as_i64().is_some()) {
                    Value::IntList(items.iter().filter_map(|v| v.as_i64()).collect())
                } else {
                    Value::List(items.iter().map(Value::from_json).collect::<Option<_>>()?)
                }
            }
            J::Object(map) => {
                let mut store = ResultStore::new();
                for (k, v) in map {
                    store.insert(k.clone(), Value::from_json(v)?);
                }
                Value::Store(store)
            }
            J::Null => return None,
        })
    }

    /// Numeric view used by arithmetic nodes.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }
}

macro_rules! typed_getter {
    ($name:ident, $variant:ident, $ty:ty, $label:literal) => {
        pub fn $name(&self, key: &str) -> Result<&$ty, StoreError> {
            match self.get(key)? {
                Value::$variant(v) => Ok(v),
                other => Err(StoreError::WrongType {
                    key: key.to_string(),
                    expected: $label,
                    found: other.type_name(),
                }),
            }
        }
    };
}

/// Insertion-ordered map from string keys to [`Value`]s.
///
/// Reading an absent key is always an error. Dotted paths (`scores.warpq`)
/// address values inside nested stores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultStore {
    entries: IndexMap<String, Value>,
}

impl ResultStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: Value) -> Option<Value> {
        self.entries.insert(key.into(), value)
    }

    pub fn get(&self, key: &str) -> Result<&Value, StoreError> {
        self.entries
            .get(key)
            .ok_or_else(|| StoreError::MissingKey(key.to_string()))
    }

    pub fn get_mut(&mut self, key: &str) -> Result<&mut Value, StoreError> {
        self.entries
            .get_mut(key)
            .ok_or_else(|| StoreError::MissingKey(key.to_string()))
    }

    /// Looks up a dot-separated path through nested stores.
    pub fn get_path(&self, path: &str) -> Result<&Value, StoreError> {
        let mut parts = path.split('.');
        let first = parts.next().unwrap_or_default();
        let mut current = self.get(first)?;
        let mut walked = first.to_string();
        for part in parts {
            let Value::Store(inner) = current else {
                return Err(StoreError::WrongType {
                    key: walked,
                    expected: "nested store",
                    found: current.type_name(),
                });
            };
            current = inner
                .get(part)
                .map_err(|_| StoreError::MissingKey(format!("{walked}.{part}")))?;
            walked.push('.');
            walked.push_str(part);
        }
        Ok(current)
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.entries.shift_remove(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Keeps only the listed keys.
    pub fn retain_keys(&mut self, keep: &[String]) {
        self.entries.retain(|k, _| keep.iter().any(|want| want == k));
    }

    pub fn scalar(&self, key: &str) -> Result<f64, StoreError> {
        let value = self.get(key)?;
        value.as_f64().ok_or_else(|| StoreError::WrongType {
            key: key.to_string(),
            expected: "scalar",
            found: value.type_name(),
        })
    }

    typed_getter!(text, Text, String, "string");
    typed_getter!(signal, Signal, Signal, "signal");
    typed_getter!(table, Table, DatasetTable, "dataset table");
    typed_getter!(matrix, Matrix, FeatureMatrix, "feature matrix");
    typed_getter!(mask, Mask, VadMask, "VAD mask");
    typed_getter!(store, Store, ResultStore, "nested store");
}

impl FromIterator<(String, Value)> for ResultStore {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_key_is_an_error() {
        let store = ResultStore::new();
        assert_eq!(
            store.get("nope"),
            Err(StoreError::MissingKey("nope".into()))
        );
    }

    #[test]
    fn dotted_paths_walk_nested_stores() {
        let mut inner = ResultStore::new();
        inner.insert("warpq", Value::Scalar(0.5));
        let mut outer = ResultStore::new();
        outer.insert("scores", Value::Store(inner));
        assert_eq!(outer.get_path("scores.warpq"), Ok(&Value::Scalar(0.5)));
        assert_eq!(
            outer.get_path("scores.lsd"),
            Err(StoreError::MissingKey("scores.lsd".into()))
        );
        outer.insert("flat", Value::Integer(1));
        assert!(matches!(
            outer.get_path("flat.x"),
            Err(StoreError::WrongType { .. })
        ));
    }

    #[test]
    fn wrong_type_reports_both_sides() {
        let mut store = ResultStore::new();
        store.insert("x", Value::Text("hi".into()));
        let err = store.signal("x").unwrap_err();
        assert_eq!(
            err,
            StoreError::WrongType {
                key: "x".into(),
                expected: "signal",
                found: "string"
            }
        );
    }

    #[test]
    fn json_literals_map_onto_values() {
        let v = Value::from_json(&serde_json::json!([1, 2, 3])).unwrap();
        assert_eq!(v, Value::IntList(vec![1, 2, 3]));
        let v = Value::from_json(&serde_json::json!({"a": 1.5})).unwrap();
        let Value::Store(s) = v else { panic!() };
        assert_eq!(s.scalar("a").unwrap(), 1.5);
    }
}
