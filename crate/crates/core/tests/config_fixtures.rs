use std::path::{Path, PathBuf};

use aqp_core::config::{self, serialize};
use aqp_core::pipeline::{self, Finding, LoadError};
use aqp_core::{ConfigError, GraphError, NodeSpec, Pipeline, Registry, ResultStore, RunSettings};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/configs").join(name)
}

fn load(name: &str) -> Result<Pipeline, LoadError> {
    Pipeline::load(fixture(name), "root", &Registry::with_defaults())
}

fn config_error(name: &str) -> ConfigError {
    match load(name) {
        Err(LoadError::Config(e)) => e,
        other => panic!("{name}: expected a config error, got {other:?}"),
    }
}

fn graph_error(name: &str) -> GraphError {
    match load(name) {
        Err(LoadError::Graph(e)) => e,
        other => panic!("{name}: expected a graph error, got {other:?}"),
    }
}

#[test]
fn minimal_config_compiles() {
    let p = load("minimal.json").unwrap();
    assert_eq!(p.graph.len(), 1);
    assert_eq!(p.graph.topological_order(), ["root"]);
}

#[test]
fn missing_file() {
    assert!(matches!(config_error("absent.json"), ConfigError::FileNotFound(_)));
}

#[test]
fn trailing_comma_has_a_location() {
    match config_error("trailing_comma.json") {
        ConfigError::MalformedJson { line, .. } => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn array_top_level() {
    assert!(matches!(config_error("top_level_array.json"), ConfigError::NonObjectTopLevel(_)));
}

#[test]
fn missing_type_field() {
    assert_eq!(config_error("missing_type.json"), ConfigError::MissingTypeField("root".into()));
}

#[test]
fn children_must_be_a_list() {
    assert_eq!(config_error("bad_children.json"), ConfigError::InvalidChildrenShape("root".into()));
}

#[test]
fn constructor_reports_missing_param() {
    assert_eq!(
        graph_error("missing_param.json"),
        GraphError::MissingParam { id: "root".into(), param: "input".into() }
    );
}

#[test]
fn unknown_type_fails_at_build_with_a_suggestion() {
    assert_eq!(
        graph_error("unknown_type.json"),
        GraphError::UnknownNodeType {
            id: "a".into(),
            node_type: "idenity".into(),
            suggestion: Some("identity".into()),
        }
    );
}

#[test]
fn structural_errors() {
    assert_eq!(
        graph_error("dangling_child.json"),
        GraphError::DanglingChild { parent: "root".into(), missing: "x".into() }
    );
    assert_eq!(graph_error("cycle.json"), GraphError::CycleDetected(vec!["a".into(), "b".into(), "a".into()]));
    assert_eq!(graph_error("no_root.json"), GraphError::MissingRoot("root".into()));
    assert_eq!(graph_error("duplicate_id.json"), GraphError::DuplicateId("a".into()));
}

#[test]
fn self_include_is_a_cycle() {
    match config_error("self_include.json").innermost() {
        ConfigError::IncludeCycle(chain) => {
            assert_eq!(chain.len(), 2);
            assert_eq!(chain[0], chain[1]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn mutual_include_is_a_cycle() {
    match config_error("mutual_a.json").innermost() {
        ConfigError::IncludeCycle(chain) => {
            let names: Vec<_> = chain.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
            assert_eq!(names, ["mutual_a.json", "mutual_b.json", "mutual_a.json"]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_include_keeps_the_chain() {
    match config_error("missing_include.json") {
        ConfigError::Included { chain, source } => {
            assert!(chain.last().unwrap().ends_with("sub/nowhere.json"));
            assert!(matches!(*source, ConfigError::FileNotFound(_)));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn includes_resolve_against_the_including_file() {
    let p = load("outer.json").unwrap();
    assert_eq!(p.document.depth(), 3);
    let report = p.run(ResultStore::new(), RunSettings::default()).unwrap();
    assert_eq!(report.store.scalar("z").unwrap(), 60.0);
    assert_eq!(report.visits, ["root", "inner", "inner/root", "inner/leaf", "inner/leaf/root"]);
}

#[test]
fn validate_lists_every_finding() {
    let reg = Registry::with_defaults();
    assert!(pipeline::validate(fixture("minimal.json"), "root", &reg).is_empty());
    let findings = pipeline::validate(fixture("two_findings.json"), "root", &reg);
    assert_eq!(findings.len(), 2, "{findings:?}");
    assert!(findings.contains(&Finding::Config(ConfigError::MissingTypeField("b".into()))));
    assert!(findings.iter().any(|f| f.to_string().contains("did you mean 'scale'")));
}

#[test]
fn shipped_examples_compile() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples");
    let reg = Registry::with_defaults();
    for name in ["warpq.json", "warpq_chain.json", "warpq_melspec.json", "casestudy.json"] {
        let path = dir.join(name);
        assert!(pipeline::validate(&path, "root", &reg).is_empty(), "{name}");
        Pipeline::load(&path, "root", &reg).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

fn arb_id() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn arb_specs() -> impl Strategy<Value = Vec<NodeSpec>> {
    proptest::collection::btree_set(arb_id(), 1..8).prop_flat_map(|ids| {
        let ids: Vec<String> = ids.into_iter().collect();
        let n = ids.len();
        let per_node = (
            proptest::sample::subsequence(ids.clone(), 0..=n),
            proptest::option::of(arb_id()),
            proptest::collection::btree_map(arb_id(), "[a-z ]{0,5}", 0..3),
            proptest::option::of(-1e6f64..1e6),
        );
        (Just(ids), proptest::collection::vec(per_node, n))
    })
    .prop_map(|(ids, parts)| {
        ids.into_iter()
            .zip(parts)
            .map(|(id, (children, out, draw, factor))| {
                let mut spec = NodeSpec::new(id, "scale").with_children(children);
                if let Some(o) = out {
                    spec = spec.with_output(o);
                }
                spec.draw_options = draw.into_iter().collect();
                if let Some(f) = factor {
                    spec = spec.with_param("factor", serde_json::json!(f));
                }
                spec
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn serialize_then_deserialize_is_identity(specs in arb_specs()) {
        let text = serde_json::to_string_pretty(&serialize(&specs)).unwrap();
        let doc = config::PipelineDocument::parse(&text, "generated.json").unwrap();
        prop_assert_eq!(config::deserialize(&doc).unwrap(), specs);
    }
}
