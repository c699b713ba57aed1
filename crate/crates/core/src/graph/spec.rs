use indexmap::IndexMap;
use serde_json::{Map, Value as Json};

use super::GraphError;

/// Declarative description of one node, as read from a pipeline document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeSpec {
    pub id: String,
    pub node_type: String,
    pub children: Vec<String>,
    pub output_key: Option<String>,
    pub draw_options: IndexMap<String, String>,
    /// Every field not interpreted by the engine, handed to the node constructor.
    pub params: Map<String, Json>,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, node_type: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            node_type: node_type.into(),
            ..Self::default()
        }
    }

    pub fn with_children<I, S>(mut self, children: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.children = children.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_output(mut self, key: impl Into<String>) -> Self {
        self.output_key = Some(key.into());
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: Json) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn params(&self) -> Params<'_> {
        Params {
            id: &self.id,
            map: &self.params,
        }
    }
}

/// Typed accessors over a node's parameter map that report errors against the node id.
#[derive(Debug, Clone, Copy)]
pub struct Params<'a> {
    id: &'a str,
    map: &'a Map<String, Json>,
}

impl<'a> Params<'a> {
    pub fn raw(&self, name: &str) -> Option<&'a Json> {
        self.map.get(name).filter(|v| !v.is_null())
    }

    pub fn missing(&self, name: &str) -> GraphError {
        GraphError::MissingParam {
            id: self.id.to_string(),
            param: name.to_string(),
        }
    }

    pub fn invalid(&self, name: &str, reason: impl Into<String>) -> GraphError {
        GraphError::InvalidParam {
            id: self.id.to_string(),
            param: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn opt_str(&self, name: &str) -> Result<Option<String>, GraphError> {
        match self.raw(name) {
            None => Ok(None),
            Some(Json::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.invalid(name, "expected a string")),
        }
    }

    pub fn str(&self, name: &str) -> Result<String, GraphError> {
        self.opt_str(name)?.ok_or_else(|| self.missing(name))
    }

    pub fn str_or(&self, name: &str, default: &str) -> Result<String, GraphError> {
        Ok(self.opt_str(name)?.unwrap_or_else(|| default.to_string()))
    }

    pub fn opt_f64(&self, name: &str) -> Result<Option<f64>, GraphError> {
        match self.raw(name) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| self.invalid(name, "expected a finite number")),
        }
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Result<f64, GraphError> {
        Ok(self.opt_f64(name)?.unwrap_or(default))
    }

    pub fn opt_usize(&self, name: &str) -> Result<Option<usize>, GraphError> {
        match self.raw(name) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .and_then(|n| usize::try_from(n).ok())
                .map(Some)
                .ok_or_else(|| self.invalid(name, "expected a non-negative integer")),
        }
    }

    pub fn usize_or(&self, name: &str, default: usize) -> Result<usize, GraphError> {
        Ok(self.opt_usize(name)?.unwrap_or(default))
    }

    pub fn u32_or(&self, name: &str, default: u32) -> Result<u32, GraphError> {
        let n = self.usize_or(name, default as usize)?;
        u32::try_from(n).map_err(|_| self.invalid(name, "value out of range"))
    }

    pub fn bool_or(&self, name: &str, default: bool) -> Result<bool, GraphError> {
        match self.raw(name) {
            None => Ok(default),
            Some(Json::Bool(b)) => Ok(*b),
            Some(_) => Err(self.invalid(name, "expected a boolean")),
        }
    }

    pub fn opt_str_list(&self, name: &str) -> Result<Option<Vec<String>>, GraphError> {
        match self.raw(name) {
            None => Ok(None),
            Some(Json::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| self.invalid(name, "expected an array of strings")),
            Some(_) => Err(self.invalid(name, "expected an array of strings")),
        }
    }

    pub fn str_list(&self, name: &str) -> Result<Vec<String>, GraphError> {
        self.opt_str_list(name)?.ok_or_else(|| self.missing(name))
    }

    /// An object of string values, kept in declaration order.
    pub fn opt_str_map(&self, name: &str) -> Result<Option<IndexMap<String, String>>, GraphError> {
        match self.raw(name) {
            None => Ok(None),
            Some(Json::Object(obj)) => obj
                .iter()
                .map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
                .collect::<Option<IndexMap<_, _>>>()
                .map(Some)
                .ok_or_else(|| self.invalid(name, "expected an object of strings")),
            Some(_) => Err(self.invalid(name, "expected an object of strings")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn typed_params_report_missing_and_invalid() {
        let spec = NodeSpec::new("n", "x")
            .with_param("frame_len", json!(512))
            .with_param("name", json!(3))
            .with_param("keys", json!(["a", "b"]));
        let p = spec.params();
        assert_eq!(p.usize_or("frame_len", 1).unwrap(), 512);
        assert_eq!(p.usize_or("hop", 128).unwrap(), 128);
        assert_eq!(
            p.str("path"),
            Err(GraphError::MissingParam {
                id: "n".into(),
                param: "path".into()
            })
        );
        assert!(matches!(
            p.str("name"),
            Err(GraphError::InvalidParam { .. })
        ));
        assert_eq!(p.str_list("keys").unwrap(), vec!["a", "b"]);
    }
}
