use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn aqp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqp")).args(args).current_dir(cwd).output().unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/configs").join(name);
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_clean_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["validate", &fixture("minimal.json")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK\n");
}

#[test]
fn validate_lists_each_finding() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["validate", &fixture("two_findings.json")], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2, "{out}");
    assert!(out.contains("'b' has no \"type\" field"), "{out}");
    assert!(out.contains("did you mean 'scale'"), "{out}");
}

#[test]
fn cyclic_config_exits_with_graph_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["run", &fixture("cycle.json"), "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a -> b -> a"), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "load_failed");
    assert_eq!(manifest["node_visit_count"], 0);
}

#[test]
fn malformed_config_exits_with_findings_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["run", &fixture("trailing_comma.json"), "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_dataset_is_a_runtime_failure_naming_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let examples = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples");
    for name in ["casestudy.json", "warpq_chain.json"] {
        std::fs::copy(examples.join(name), dir.path().join(name)).unwrap();
    }
    let o = aqp(&["run", "casestudy.json", "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("'root'") && err.contains("dataset.csv"), "{err}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
    assert_eq!(manifest["node_visit_count"], 1);
    assert_eq!(manifest["root_id"], "root");
}

#[test]
fn run_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["run", &fixture("outer.json"), "--out-dir", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["node_visit_count"], 5);
    assert_eq!(manifest["log_level"], "warn");
    assert!(manifest["elapsed"].as_f64().unwrap() >= 0.0);
}

#[test]
fn viz_defaults_to_a_file_beside_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("outer.json"), dir.path().join("outer.json")).unwrap();
    std::fs::create_dir(dir.path().join("sub")).unwrap();
    for f in ["inner.json", "leaf.json"] {
        std::fs::copy(fixture(&format!("sub/{f}")), dir.path().join("sub").join(f)).unwrap();
    }
    let o = aqp(&["viz", "outer.json", "--expand"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "outer.dot");
    let dot = std::fs::read_to_string(dir.path().join("outer.dot")).unwrap();
    assert!(dot.contains("\"inner/leaf/root\""), "{dot}");
}

#[test]
fn gen_dataset_writes_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqp(&["gen-dataset", "data", "--refs", "1", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("data/dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(dir.path().join("data/refs/ref_00.wav").is_file());
    assert!(dir.path().join("data/deg/ref_00_shift.wav").is_file());
}
