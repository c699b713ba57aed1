use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aqp_core::corpus::{write_corpus, CorpusConfig};
use aqp_core::pipeline::{self, LoadError, Pipeline};
use aqp_core::viz::{to_dot_with, DotOptions};
use aqp_core::{Registry, ResultStore, RunSettings, DEFAULT_ROOT};
use clap::{Parser, Subcommand};
use serde::Serialize;
use tracing_subscriber::EnvFilter;

const EXIT_FINDINGS: u8 = 1;
const EXIT_GRAPH: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "aqp", version, about = "Run, draw and check audio quality pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a pipeline.
    Run {
        config: PathBuf,
        #[arg(long, default_value = DEFAULT_ROOT)]
        root: String,
        /// Directory for output files and the run manifest.
        #[arg(long, default_value = "aqp-out")]
        out_dir: PathBuf,
    },
    /// Write the compiled graph as DOT.
    Viz {
        config: PathBuf,
        /// Defaults to `<config-stem>.dot` next to the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draw encapsulated and looped sub-pipelines inline.
        #[arg(long)]
        expand: bool,
        #[arg(long, default_value = DEFAULT_ROOT)]
        root: String,
    },
    /// Check a config without executing it; prints every finding.
    Validate {
        config: PathBuf,
        #[arg(long, default_value = DEFAULT_ROOT)]
        root: String,
    },
    /// Write the synthetic corpus and its dataset CSV.
    GenDataset {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = CorpusConfig::default().n_refs)]
        refs: usize,
    },
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config_path: String,
    root_id: &'a str,
    output_dir: String,
    log_level: String,
    elapsed: f64,
    node_visit_count: usize,
    status: &'static str,
    error: Option<String>,
}

fn log_level() -> String {
    std::env::var("AQP_LOG").unwrap_or_else(|_| "warn".into())
}

fn init_logging() {
    let filter = EnvFilter::try_new(log_level()).unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
}

fn load_failure(err: &LoadError) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        LoadError::Config(_) => ExitCode::from(EXIT_FINDINGS),
        LoadError::Graph(_) => ExitCode::from(EXIT_GRAPH),
    }
}

fn write_manifest(out_dir: &Path, manifest: &RunManifest<'_>) {
    let path = out_dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    if let Err(e) = std::fs::create_dir_all(out_dir).and_then(|_| std::fs::write(&path, text)) {
        eprintln!("warning: cannot write {}: {e}", path.display());
    }
}

fn cmd_run(config: &Path, root: &str, out_dir: &Path) -> ExitCode {
    let start = Instant::now();
    let registry = Registry::with_defaults();
    let mut manifest = RunManifest {
        config_path: config.display().to_string(),
        root_id: root,
        output_dir: out_dir.display().to_string(),
        log_level: log_level(),
        elapsed: 0.0,
        node_visit_count: 0,
        status: "ok",
        error: None,
    };
    let (code, visits) = match Pipeline::load(config, root, &registry) {
        Err(e) => {
            manifest.status = "load_failed";
            manifest.error = Some(e.to_string());
            (load_failure(&e), 0)
        }
        Ok(p) => {
            for w in p.graph.warnings() {
                tracing::warn!("{w}");
            }
            if let Err(e) = std::fs::create_dir_all(out_dir) {
                eprintln!("error: cannot create {}: {e}", out_dir.display());
                return ExitCode::from(EXIT_RUNTIME);
            }
            let settings = RunSettings {
                out_dir: out_dir.to_path_buf(),
            };
            match p.run(ResultStore::new(), settings) {
                Ok(report) => (ExitCode::SUCCESS, report.visits.len()),
                Err((e, visits)) => {
                    eprintln!("error: {e}");
                    manifest.status = "failed";
                    manifest.error = Some(e.to_string());
                    (ExitCode::from(EXIT_RUNTIME), visits.len())
                }
            }
        }
    };
    manifest.elapsed = start.elapsed().as_secs_f64();
    manifest.node_visit_count = visits;
    tracing::info!(elapsed = manifest.elapsed, visits, "run finished");
    write_manifest(out_dir, &manifest);
    code
}

fn default_dot_path(config: &Path) -> PathBuf {
    let stem = config.file_stem().map_or_else(|| "pipeline".into(), |s| s.to_string_lossy().into_owned());
    config.with_file_name(format!("{stem}.dot"))
}

fn cmd_viz(config: &Path, out: Option<&Path>, expand: bool, root: &str) -> ExitCode {
    let pipeline = match Pipeline::load(config, root, &Registry::with_defaults()) {
        Ok(p) => p,
        Err(e) => return load_failure(&e),
    };
    let dot = to_dot_with(&pipeline.graph, DotOptions { expand });
    let path = out.map_or_else(|| default_dot_path(config), Path::to_path_buf);
    match std::fs::write(&path, dot.text) {
        Ok(()) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_validate(config: &Path, root: &str) -> ExitCode {
    let findings = pipeline::validate(config, root, &Registry::with_defaults());
    if findings.is_empty() {
        println!("OK");
        return ExitCode::SUCCESS;
    }
    for f in &findings {
        println!("{f}");
    }
    ExitCode::from(EXIT_FINDINGS)
}

fn cmd_gen_dataset(dir: &Path, seed: u64, refs: usize) -> ExitCode {
    let cfg = CorpusConfig {
        n_refs: refs,
        ..CorpusConfig::default()
    };
    match write_corpus(dir, seed, &cfg) {
        Ok(csv) => {
            println!("{}", csv.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match &cli.command {
        Command::Run { config, root, out_dir } => cmd_run(config, root, out_dir),
        Command::Viz {
            config,
            out,
            expand,
            root,
        } => cmd_viz(config, out.as_deref(), *expand, root),
        Command::Validate { config, root } => cmd_validate(config, root),
        Command::GenDataset { dir, seed, refs } => cmd_gen_dataset(dir, *seed, *refs),
    }
}
