//! JSON pipeline documents: parsing, deserialization into [`NodeSpec`]s, and
//! resolution of sub-pipeline includes.
//!
//! Document format: a top-level object whose keys are node ids. Each value is
//! an object with a required `"type"`, optional `"children"` (array of ids),
//! `"output_key"` and `"draw_options"` (object of strings). Any other field is
//! a node parameter. `encapsulation` and `loop` nodes take their sub-pipeline
//! from `"path"` (a file, relative to the including document) or an inline
//! `"pipeline"` object.

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::{Deserialize, Deserializer, MapAccess, Visitor};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::graph::NodeSpec;

/// Maximum nesting of file includes.
pub const MAX_INCLUDE_DEPTH: usize = 32;

/// Node types whose entries may reference a sub-pipeline.
pub const SUBPIPELINE_TYPES: [&str; 2] = ["encapsulation", "loop"];

const RESERVED: [&str; 4] = ["type", "children", "output_key", "draw_options"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("cannot read {}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("malformed JSON in {} at line {line}, column {column}: {message}", .path.display())]
    MalformedJson {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("top level of {} must be a JSON object", .0.display())]
    NonObjectTopLevel(PathBuf),
    #[error("entry '{0}' must be a JSON object")]
    InvalidEntry(String),
    #[error("entry '{0}' has no \"type\" field")]
    MissingTypeField(String),
    #[error("entry '{0}' has a \"children\" field that is not an array of strings")]
    InvalidChildrenShape(String),
    #[error("entry '{id}' has an invalid \"{field}\" field")]
    InvalidField { id: String, field: String },
    #[error("include cycle: {}", display_chain(.0))]
    IncludeCycle(Vec<PathBuf>),
    #[error("includes nested deeper than {MAX_INCLUDE_DEPTH}: {}", display_chain(.0))]
    IncludeTooDeep(Vec<PathBuf>),
    #[error("while including {}: {source}", display_chain(.chain))]
    Included {
        chain: Vec<PathBuf>,
        #[source]
        source: Box<ConfigError>,
    },
}

fn display_chain(chain: &[PathBuf]) -> String {
    chain
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl ConfigError {
    pub fn innermost(&self) -> &ConfigError {
        match self {
            ConfigError::Included { source, .. } => source.innermost(),
            other => other,
        }
    }
}

/// A parsed pipeline document with entry order preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineDocument {
    /// `(id, raw entry)` in file order. Duplicate keys are kept so they can be reported.
    pub entries: Vec<(String, Json)>,
    pub source_path: PathBuf,
}

/// Ordered top-level entries, duplicates preserved.
struct Entries(Vec<(String, Json)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Json>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl PipelineDocument {
    /// Parses document text. `source_path` is used for error messages and
    /// for resolving relative includes.
    pub fn parse(text: &str, source_path: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let source_path = source_path.into();
        let value: Json = serde_json::from_str(text).map_err(|e| ConfigError::MalformedJson {
            path: source_path.clone(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if !value.is_object() {
            return Err(ConfigError::NonObjectTopLevel(source_path));
        }
        let Entries(entries) = serde_json::from_str(text).map_err(|e| ConfigError::MalformedJson {
            path: source_path.clone(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(Self {
            entries,
            source_path,
        })
    }

    /// Builds a document from an already-parsed JSON object (inline sub-pipelines).
    pub fn from_json(value: &Json, source_path: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let source_path = source_path.into();
        let Json::Object(obj) = value else {
            return Err(ConfigError::NonObjectTopLevel(source_path));
        };
        Ok(Self {
            entries: obj.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            source_path,
        })
    }

    /// Directory relative paths in this document resolve against.
    pub fn base_dir(&self) -> PathBuf {
        match self.source_path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }
}

/// Reads and parses a pipeline document.
pub fn load_document(path: impl AsRef<Path>) -> Result<PipelineDocument, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => ConfigError::FileNotFound(path.to_path_buf()),
        _ => ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    })?;
    PipelineDocument::parse(&text, path)
}

fn entry_to_spec(id: &str, raw: &Json) -> Result<NodeSpec, ConfigError> {
    let Json::Object(obj) = raw else {
        return Err(ConfigError::InvalidEntry(id.to_string()));
    };
    let node_type = match obj.get("type") {
        None => return Err(ConfigError::MissingTypeField(id.to_string())),
        Some(Json::String(s)) => s.clone(),
        Some(_) => {
            return Err(ConfigError::InvalidField {
                id: id.to_string(),
                field: "type".into(),
            })
        }
    };
    let children = match obj.get("children") {
        None | Some(Json::Null) => Vec::new(),
        Some(Json::Array(items)) => items
            .iter()
            .map(|c| c.as_str().map(str::to_string))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ConfigError::InvalidChildrenShape(id.to_string()))?,
        Some(_) => return Err(ConfigError::InvalidChildrenShape(id.to_string())),
    };
    let output_key = match obj.get("output_key") {
        None | Some(Json::Null) => None,
        Some(Json::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(ConfigError::InvalidField {
                id: id.to_string(),
                field: "output_key".into(),
            })
        }
    };
    let bad_draw = || ConfigError::InvalidField {
        id: id.to_string(),
        field: "draw_options".into(),
    };
    let draw_options = match obj.get("draw_options") {
        None | Some(Json::Null) => IndexMap::new(),
        Some(Json::Object(opts)) => opts
            .iter()
            .map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
            .collect::<Option<IndexMap<_, _>>>()
            .ok_or_else(bad_draw)?,
        Some(_) => return Err(bad_draw()),
    };
    let params: Map<String, Json> = obj
        .iter()
        .filter(|(k, _)| !RESERVED.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(NodeSpec {
        id: id.to_string(),
        node_type,
        children,
        output_key,
        draw_options,
        params,
    })
}

/// Converts every entry into a [`NodeSpec`], collecting all entry errors.
pub fn deserialize_all(doc: &PipelineDocument) -> (Vec<NodeSpec>, Vec<ConfigError>) {
    let mut specs = Vec::with_capacity(doc.entries.len());
    let mut errors = Vec::new();
    for (id, raw) in &doc.entries {
        match entry_to_spec(id, raw) {
            Ok(spec) => specs.push(spec),
            Err(e) => errors.push(e),
        }
    }
    (specs, errors)
}

/// Converts every entry into a [`NodeSpec`], failing on the first bad entry.
pub fn deserialize(doc: &PipelineDocument) -> Result<Vec<NodeSpec>, ConfigError> {
    let (specs, errors) = deserialize_all(doc);
    match errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(specs),
    }
}

/// Inverse of [`deserialize`]: renders specs back into document JSON.
pub fn serialize(specs: &[NodeSpec]) -> Json {
    let mut top = Map::new();
    for spec in specs {
        let mut obj = Map::new();
        obj.insert("type".into(), Json::String(spec.node_type.clone()));
        obj.insert(
            "children".into(),
            Json::Array(spec.children.iter().cloned().map(Json::String).collect()),
        );
        if let Some(k) = &spec.output_key {
            obj.insert("output_key".into(), Json::String(k.clone()));
        }
        if !spec.draw_options.is_empty() {
            let opts = spec
                .draw_options
                .iter()
                .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                .collect();
            obj.insert("draw_options".into(), Json::Object(opts));
        }
        for (k, v) in &spec.params {
            obj.insert(k.clone(), v.clone());
        }
        top.insert(spec.id.clone(), Json::Object(obj));
    }
    Json::Object(top)
}

/// A document with every sub-pipeline reference loaded and resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedDocument {
    pub document: PipelineDocument,
    /// Sub-pipelines keyed by the id of the node that references them.
    pub includes: IndexMap<String, ResolvedDocument>,
}

impl ResolvedDocument {
    /// Depth of the include tree (1 for a document without includes).
    pub fn depth(&self) -> usize {
        1 + self.includes.values().map(Self::depth).max().unwrap_or(0)
    }
}

fn canonical(path: &Path) -> PathBuf {
    path.canonicalize().unwrap_or_else(|_| path.to_path_buf())
}

/// Recursively loads the sub-pipelines referenced by `doc`.
///
/// `include_stack` holds the files currently being included (outermost
/// first); re-entering one of them is an [`ConfigError::IncludeCycle`].
pub fn resolve_encapsulations(
    doc: PipelineDocument,
    include_stack: &[PathBuf],
) -> Result<ResolvedDocument, ConfigError> {
    let mut stack = include_stack.to_vec();
    let own = canonical(&doc.source_path);
    if stack.last() != Some(&own) && doc.source_path.exists() {
        stack.push(own);
    }
    resolve_inner(doc, &stack)
}

fn resolve_inner(doc: PipelineDocument, stack: &[PathBuf]) -> Result<ResolvedDocument, ConfigError> {
    let mut includes = IndexMap::new();
    let base = doc.base_dir();
    for (id, raw) in &doc.entries {
        let Some(obj) = raw.as_object() else { continue };
        let is_sub = obj
            .get("type")
            .and_then(Json::as_str)
            .is_some_and(|t| SUBPIPELINE_TYPES.contains(&t));
        if !is_sub {
            continue;
        }
        if let Some(Json::String(rel)) = obj.get("path") {
            let target = canonical(&base.join(rel));
            if stack.contains(&target) {
                let mut chain = stack.to_vec();
                chain.push(target);
                return Err(ConfigError::IncludeCycle(chain));
            }
            let mut chain = stack.to_vec();
            chain.push(target.clone());
            if stack.len() >= MAX_INCLUDE_DEPTH {
                return Err(ConfigError::IncludeTooDeep(chain));
            }
            let wrap = |e: ConfigError| match e {
                ConfigError::IncludeCycle(_) | ConfigError::IncludeTooDeep(_) | ConfigError::Included { .. } => e,
                other => ConfigError::Included {
                    chain: chain.clone(),
                    source: Box::new(other),
                },
            };
            let child = load_document(&target).map_err(wrap)?;
            let resolved = resolve_inner(child, &chain).map_err(wrap)?;
            includes.insert(id.clone(), resolved);
        } else if let Some(inline @ Json::Object(_)) = obj.get("pipeline") {
            let child = PipelineDocument::from_json(inline, doc.source_path.clone())?;
            includes.insert(id.clone(), resolve_inner(child, stack)?);
        }
    }
    Ok(ResolvedDocument {
        document: doc,
        includes,
    })
}

/// Loads `path` and resolves all of its includes.
pub fn load_resolved(path: impl AsRef<Path>) -> Result<ResolvedDocument, ConfigError> {
    let doc = load_document(path)?;
    resolve_encapsulations(doc, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn parse(text: &str) -> Result<PipelineDocument, ConfigError> {
        PipelineDocument::parse(text, "test.json")
    }

    #[test]
    fn minimal_document() {
        let doc = parse(r#"{"root": {"type":"identity","children":[]}}"#).unwrap();
        assert_eq!(doc.entries.len(), 1);
        let specs = deserialize(&doc).unwrap();
        assert_eq!(specs[0].id, "root");
        assert_eq!(specs[0].node_type, "identity");
    }

    #[test]
    fn trailing_comma_reports_location() {
        let err = parse("{\n  \"root\": {\"type\": \"identity\"},\n}").unwrap_err();
        match err {
            ConfigError::MalformedJson { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column >= 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn array_top_level_is_rejected() {
        assert_eq!(
            parse("[1, 2]").unwrap_err(),
            ConfigError::NonObjectTopLevel("test.json".into())
        );
    }

    #[test]
    fn duplicate_keys_are_preserved_for_reporting() {
        let doc = parse(r#"{"a": {"type":"identity"}, "a": {"type":"identity"}}"#).unwrap();
        assert_eq!(doc.ids().collect::<Vec<_>>(), vec!["a", "a"]);
    }

    #[test]
    fn children_order_and_optional_fields() {
        let doc = parse(r#"{"root": {"type":"identity","children":["b","a"]}}"#).unwrap();
        let spec = &deserialize(&doc).unwrap()[0];
        assert_eq!(spec.children, vec!["b", "a"]);
        assert_eq!(spec.output_key, None);
        assert!(spec.draw_options.is_empty());
    }

    #[test]
    fn encapsulation_path_lands_in_params() {
        let doc = parse(r#"{"w": {"type":"encapsulation","path":"sub.json"}}"#).unwrap();
        let spec = &deserialize(&doc).unwrap()[0];
        assert_eq!(spec.params.get("path"), Some(&json!("sub.json")));
    }

    #[test]
    fn entry_errors_are_all_collected() {
        let doc = parse(
            r#"{"a": {"children": []}, "b": {"type":"identity","children":"x"}, "c": 3,
                "d": {"type":"identity","draw_options":{"shape":1}}}"#,
        )
        .unwrap();
        let (_, errs) = deserialize_all(&doc);
        assert_eq!(
            errs,
            vec![
                ConfigError::MissingTypeField("a".into()),
                ConfigError::InvalidChildrenShape("b".into()),
                ConfigError::InvalidEntry("c".into()),
                ConfigError::InvalidField {
                    id: "d".into(),
                    field: "draw_options".into()
                },
            ]
        );
    }

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn missing_file() {
        let err = load_document("/definitely/not/here.json").unwrap_err();
        assert!(matches!(err, ConfigError::FileNotFound(_)));
    }

    #[test]
    fn single_include_gives_depth_two() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "b.json", r#"{"root": {"type":"identity"}}"#);
        let a = write(
            dir.path(),
            "a.json",
            r#"{"root": {"type":"encapsulation","path":"b.json"}}"#,
        );
        let resolved = load_resolved(&a).unwrap();
        assert_eq!(resolved.depth(), 2);
        assert!(resolved.includes.contains_key("root"));
    }

    fn file_names(chain: &[PathBuf]) -> Vec<String> {
        chain
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect()
    }

    #[test]
    fn self_include_is_a_cycle() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.json",
            r#"{"root": {"type":"encapsulation","path":"a.json"}}"#,
        );
        match load_resolved(&a).unwrap_err() {
            ConfigError::IncludeCycle(chain) => assert_eq!(file_names(&chain), vec!["a.json", "a.json"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mutual_include_is_a_cycle() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "b.json",
            r#"{"root": {"type":"encapsulation","path":"a.json"}}"#,
        );
        let a = write(
            dir.path(),
            "a.json",
            r#"{"root": {"type":"encapsulation","path":"b.json"}}"#,
        );
        match load_resolved(&a).unwrap_err() {
            ConfigError::IncludeCycle(chain) => {
                assert_eq!(file_names(&chain), vec!["a.json", "b.json", "a.json"])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn includes_resolve_relative_to_the_including_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        write(&dir.path().join("sub"), "leaf.json", r#"{"root": {"type":"identity"}}"#);
        write(
            &dir.path().join("sub"),
            "mid.json",
            r#"{"root": {"type":"encapsulation","path":"leaf.json"}}"#,
        );
        let top = write(
            dir.path(),
            "top.json",
            r#"{"root": {"type":"encapsulation","path":"sub/mid.json"}}"#,
        );
        assert_eq!(load_resolved(&top).unwrap().depth(), 3);
    }

    #[test]
    fn nested_missing_file_carries_chain() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.json",
            r#"{"root": {"type":"encapsulation","path":"gone.json"}}"#,
        );
        match load_resolved(&a).unwrap_err() {
            ConfigError::Included { chain, source } => {
                assert_eq!(file_names(&chain), vec!["a.json", "gone.json"]);
                assert!(matches!(*source, ConfigError::FileNotFound(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn include_depth_is_capped() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..40 {
            write(
                dir.path(),
                &format!("f{i}.json"),
                &format!(r#"{{"root": {{"type":"encapsulation","path":"f{}.json"}}}}"#, i + 1),
            );
        }
        write(dir.path(), "f40.json", r#"{"root": {"type":"identity"}}"#);
        let err = load_resolved(dir.path().join("f0.json")).unwrap_err();
        match err {
            ConfigError::IncludeTooDeep(chain) => assert_eq!(chain.len(), MAX_INCLUDE_DEPTH + 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inline_loop_pipeline_is_resolved() {
        let doc = parse(
            r#"{"root": {"type":"loop","iterable":"xs","pipeline":{"root":{"type":"identity"}}}}"#,
        )
        .unwrap();
        let resolved = resolve_encapsulations(doc, &[]).unwrap();
        assert_eq!(resolved.depth(), 2);
    }

    fn arb_ident() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_-]{0,6}"
    }

    fn arb_spec() -> impl Strategy<Value = NodeSpec> {
        (
            arb_ident(),
            arb_ident(),
            proptest::collection::vec(arb_ident(), 0..4),
            proptest::option::of(arb_ident()),
            proptest::collection::vec((arb_ident(), "[ -~]{0,8}"), 0..3),
            proptest::collection::vec((arb_ident(), any::<i32>()), 0..3),
        )
            .prop_map(|(id, ty, children, out, draw, params)| {
                let mut spec = NodeSpec::new(id, ty).with_children(children);
                spec.output_key = out;
                spec.draw_options = draw.into_iter().collect();
                for (k, v) in params {
                    if !RESERVED.contains(&k.as_str()) {
                        spec.params.insert(k, json!(v));
                    }
                }
                spec
            })
    }

    proptest! {
        #[test]
        fn serialize_then_deserialize_is_identity(specs in proptest::collection::vec(arb_spec(), 0..6)) {
            // Ids must be unique for an object round trip.
            let mut seen = std::collections::HashSet::new();
            let specs: Vec<NodeSpec> = specs.into_iter().filter(|s| seen.insert(s.id.clone())).collect();
            let text = serde_json::to_string(&serialize(&specs)).unwrap();
            let doc = PipelineDocument::parse(&text, "rt.json").unwrap();
            prop_assert_eq!(deserialize(&doc).unwrap(), specs);
        }
    }
}
