//! Fixtures shared by the benchmarks.

use aqp_core::corpus::{reference, CorpusConfig};
use aqp_core::graph::NodeSpec;
use aqp_core::Signal;

/// A chain of `n` identity nodes, `root -> n1 -> n2 -> ...`.
pub fn chain_specs(n: usize) -> Vec<NodeSpec> {
    (0..n)
        .map(|i| {
            let id = if i == 0 { "root".to_string() } else { format!("n{i}") };
            let spec = NodeSpec::new(id, "identity");
            if i + 1 < n {
                spec.with_children([format!("n{}", i + 1)])
            } else {
                spec
            }
        })
        .collect()
}

/// A binary tree of identity nodes with `depth` levels below the root.
pub fn tree_specs(depth: u32) -> Vec<NodeSpec> {
    let count = (1usize << (depth + 1)) - 1;
    let name = |i: usize| if i == 0 { "root".to_string() } else { format!("t{i}") };
    (0..count)
        .map(|i| {
            let kids: Vec<String> = [2 * i + 1, 2 * i + 2].into_iter().filter(|&k| k < count).map(name).collect();
            NodeSpec::new(name(i), "identity").with_children(kids)
        })
        .collect()
}

/// One second of the first synthetic reference.
pub fn speech_second() -> Signal {
    let cfg = CorpusConfig {
        duration_secs: 1.0,
        ..CorpusConfig::default()
    };
    reference(1, 0, &cfg)
}
