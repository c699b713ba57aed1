use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;

use super::{GraphError, Node, NodeSpec, PipelineGraph};
use crate::config::{self, PipelineDocument, ResolvedDocument};

pub type Constructor =
    Arc<dyn Fn(&NodeSpec, &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> + Send + Sync>;

/// Maps node type names to constructors.
#[derive(Clone, Default)]
pub struct Registry {
    ctors: BTreeMap<String, Constructor>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("types", &self.ctors.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    /// An empty registry.
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every built-in node type.
    pub fn with_defaults() -> Self {
        let mut reg = Self::new();
        crate::catalog::register_all(&mut reg);
        reg
    }

    pub fn register<F>(&mut self, name: impl Into<String>, ctor: F) -> &mut Self
    where
        F: Fn(&NodeSpec, &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError>
            + Send
            + Sync
            + 'static,
    {
        self.ctors.insert(name.into(), Arc::new(ctor));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.ctors.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&Constructor> {
        self.ctors.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ctors.keys().map(String::as_str)
    }

    /// Closest registered type name by edit distance, if reasonably close.
    pub fn suggest(&self, name: &str) -> Option<String> {
        self.ctors
            .keys()
            .map(|k| (strsim::levenshtein(name, k), k))
            .filter(|(d, k)| *d <= (k.len().max(name.len()) / 2).max(2))
            .min_by_key(|(d, _)| *d)
            .map(|(_, k)| k.clone())
    }
}

/// What a node constructor can see while the graph is being compiled.
pub struct BuildContext<'a> {
    pub registry: &'a Registry,
    /// Directory that relative paths in node parameters resolve against.
    pub base_dir: PathBuf,
    includes: Option<&'a IndexMap<String, ResolvedDocument>>,
}

impl<'a> BuildContext<'a> {
    pub fn new(registry: &'a Registry) -> Self {
        Self {
            registry,
            base_dir: PathBuf::from("."),
            includes: None,
        }
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn for_document(registry: &'a Registry, resolved: &'a ResolvedDocument) -> Self {
        Self {
            registry,
            base_dir: resolved.document.base_dir(),
            includes: Some(&resolved.includes),
        }
    }

    pub fn resolve_path(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Compiles the sub-pipeline attached to `spec` (via `path` or an inline `pipeline`).
    pub fn sub_pipeline(&self, spec: &NodeSpec) -> Result<PipelineGraph, GraphError> {
        let params = spec.params();
        let root = params.str_or("root", "root")?;
        let nested = |source: GraphError| GraphError::Nested {
            id: spec.id.clone(),
            source: Box::new(source),
        };
        if let Some(resolved) = self.includes.and_then(|inc| inc.get(&spec.id)) {
            return crate::pipeline::compile_resolved(resolved, &root, self.registry)
                .map_err(nested);
        }
        // Not pre-resolved: resolve on the spot.
        let doc = if let Some(path) = params.opt_str("path")? {
            config::load_document(self.resolve_path(&path)).map_err(|e| nested(e.into()))?
        } else if let Some(inline) = params.raw("pipeline") {
            PipelineDocument::from_json(inline, self.base_dir.join("<inline>"))
                .map_err(|e| nested(e.into()))?
        } else {
            return Err(params.missing("path"));
        };
        let resolved = config::resolve_encapsulations(doc, &[]).map_err(|e| nested(e.into()))?;
        crate::pipeline::compile_resolved(&resolved, &root, self.registry).map_err(nested)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suggestion_finds_nearest_type() {
        let reg = Registry::with_defaults();
        assert_eq!(reg.suggest("mfc"), Some("mfcc".to_string()));
        assert_eq!(reg.suggest("encapsulaton"), Some("encapsulation".to_string()));
        assert_eq!(reg.suggest("zzzzzzzzzzzzzzzzzzzz"), None);
    }
}
