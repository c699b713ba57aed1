mod common;

use std::path::Path;

use aqp_core::audio::DatasetRow;
use aqp_core::corpus::{write_corpus, CorpusConfig};
use aqp_core::outputs::{render_latex_table, results_csv_text, scatter_svg_text};
use aqp_core::{CorrelationReport, DatasetTable, Pipeline, Registry, ResultStore, RunSettings, ScoreCell};
use common::{check_golden, examples_dir};

fn small_table() -> DatasetTable {
    let rows = [("a", "g711", 4.1), ("b", "opus_6k", 2.35), ("c", "g711", 3.0), ("d", "opus_6k", 1.5), ("e", "amr", 3.7)]
        .iter()
        .map(|(n, codec, mos)| DatasetRow {
            ref_path: format!("refs/{n}.wav"),
            deg_path: format!("deg/{n}_{codec}.wav"),
            codec: codec.to_string(),
            mos: *mos,
        })
        .collect();
    let mut t = DatasetTable::from_rows(rows, ".").unwrap();
    let v = ScoreCell::Value;
    t.set_scores("warp_q", vec![v(0.8), v(2.9), v(1.7), v(3.3), v(1.1)]).unwrap();
    t.set_scores("lsd%", vec![v(3.25), v(9.0), ScoreCell::Error("NoVoicedFrames".into()), v(14.5), v(3.25)]).unwrap();
    t
}

#[test]
fn golden_report_files() {
    let t = small_table();
    check_golden("small_results.csv", &results_csv_text(&t).unwrap());
    let report = CorrelationReport::from_table(&t).unwrap();
    check_golden("small_correlations.tex", &render_latex_table(&report).unwrap());
    check_golden("small_scatter_warp_q.svg", &scatter_svg_text(&t, "warp_q").unwrap());
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Rank = 1 + (number strictly below) + (ties - 1) / 2.
fn rank_oracle(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let below = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

fn copy_examples(to: &Path) {
    for name in ["casestudy.json", "warpq_chain.json"] {
        std::fs::copy(examples_dir().join(name), to.join(name)).unwrap();
    }
}

#[test]
fn latex_table_agrees_with_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    copy_examples(dir.path());
    let cfg = CorpusConfig { n_refs: 2, ..CorpusConfig::default() };
    write_corpus(dir.path().join("data"), 7, &cfg).unwrap();
    let out = dir.path().join("out");
    let p = Pipeline::load(dir.path().join("casestudy.json"), "root", &Registry::with_defaults()).unwrap();
    p.run(ResultStore::new(), RunSettings { out_dir: out.clone() }).unwrap();

    let mut reader = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 10);
    let col = |name: &str| -> Vec<f64> {
        let i = headers.iter().position(|h| h == name).unwrap();
        records.iter().map(|r| r[i].parse().unwrap()).collect()
    };
    let mos = col("mos");

    let tex = std::fs::read_to_string(out.join("correlations.tex")).unwrap();
    for metric in ["lsd", "warpq"] {
        let scores = col(metric);
        let line = tex.lines().find(|l| l.starts_with(&format!("{metric} &"))).unwrap();
        let cells: Vec<&str> = line.trim_end_matches(" \\\\").split(" & ").collect();
        let printed: Vec<f64> = cells[1..3].iter().map(|c| c.parse().unwrap()).collect();
        let want = [pearson_oracle(&mos, &scores), pearson_oracle(&rank_oracle(&mos), &rank_oracle(&scores))];
        for (got, w) in printed.iter().zip(want) {
            assert!((got - w).abs() <= 5e-4 + 1e-12, "{metric}: printed {got}, recomputed {w}");
        }
        assert_eq!(cells[3], "10");

        let svg = std::fs::read_to_string(out.join(format!("scatter_{metric}.svg"))).unwrap();
        assert_eq!(svg.matches("class=\"marker\"").count(), 10);
    }
}
