use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;

use super::{BuildContext, GraphError, Node, NodeSpec, Registry};

/// One compiled node: its declaration plus the executable instance.
pub struct GraphNode {
    pub spec: NodeSpec,
    pub exec: Box<dyn Node>,
}

/// Immutable compiled DAG with a designated root.
pub struct PipelineGraph {
    nodes: IndexMap<String, GraphNode>,
    root_id: String,
    warnings: Vec<String>,
}

impl fmt::Debug for PipelineGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineGraph")
            .field("root_id", &self.root_id)
            .field("adjacency", &self.adjacency())
            .finish()
    }
}

impl PipelineGraph {
    pub fn root_id(&self) -> &str {
        &self.root_id
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    /// Nodes in declaration order.
    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, id: &str) -> &[String] {
        self.nodes
            .get(id)
            .map(|n| n.spec.children.as_slice())
            .unwrap_or_default()
    }

    /// Every (parent, child) pair, parents in declaration order.
    pub fn adjacency(&self) -> Vec<(String, String)> {
        self.nodes
            .values()
            .flat_map(|n| {
                n.spec
                    .children
                    .iter()
                    .map(move |c| (n.spec.id.clone(), c.clone()))
            })
            .collect()
    }

    /// Kahn topological order; ties broken by declaration order.
    pub fn topological_order(&self) -> Vec<String> {
        let mut indegree: HashMap<&str, usize> =
            self.nodes.keys().map(|k| (k.as_str(), 0)).collect();
        for node in self.nodes.values() {
            for c in &node.spec.children {
                *indegree.get_mut(c.as_str()).expect("validated child") += 1;
            }
        }
        let mut ready: VecDeque<&str> = self
            .nodes
            .keys()
            .map(String::as_str)
            .filter(|k| indegree[k] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(id) = ready.pop_front() {
            order.push(id.to_string());
            for c in self.children(id) {
                let d = indegree.get_mut(c.as_str()).expect("validated child");
                *d -= 1;
                if *d == 0 {
                    ready.push_back(c);
                }
            }
        }
        order
    }

    /// Non-fatal findings from construction, such as unreachable nodes.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Structural validation: duplicate ids, unknown types, dangling children,
/// missing root and cycles. Returns every finding rather than the first.
pub fn check_structure(specs: &[NodeSpec], root_id: &str, registry: &Registry) -> Vec<GraphError> {
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for spec in specs {
        if !seen.insert(spec.id.as_str()) {
            errors.push(GraphError::DuplicateId(spec.id.clone()));
        }
    }
    for spec in specs {
        if !registry.contains(&spec.node_type) {
            errors.push(GraphError::UnknownNodeType {
                id: spec.id.clone(),
                node_type: spec.node_type.clone(),
                suggestion: registry.suggest(&spec.node_type),
            });
        }
    }
    for spec in specs {
        for child in &spec.children {
            if !seen.contains(child.as_str()) {
                errors.push(GraphError::DanglingChild {
                    parent: spec.id.clone(),
                    missing: child.clone(),
                });
            }
        }
    }
    if !seen.contains(root_id) {
        errors.push(GraphError::MissingRoot(root_id.to_string()));
    }
    if let Some(cycle) = find_cycle(specs, root_id) {
        errors.push(GraphError::CycleDetected(cycle));
    }
    errors
}

/// Depth-first search with an explicit path stack. Starts at the root, then
/// any remaining node in declaration order. Returns a witness `[a, b, ..., a]`.
fn find_cycle(specs: &[NodeSpec], root_id: &str) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut adjacency: IndexMap<&str, &[String]> = IndexMap::new();
    for spec in specs {
        adjacency.entry(spec.id.as_str()).or_insert(spec.children.as_slice());
    }
    let mut marks: HashMap<&str, Mark> = adjacency.keys().map(|k| (*k, Mark::White)).collect();

    let starts = std::iter::once(root_id)
        .filter(|r| adjacency.contains_key(r))
        .chain(adjacency.keys().copied());
    for start in starts {
        if marks[start] != Mark::White {
            continue;
        }
        // (node, next child index)
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        marks.insert(start, Mark::Grey);
        while let Some(top) = stack.last_mut() {
            let (node, next) = *top;
            let children = adjacency[node];
            if next == children.len() {
                marks.insert(node, Mark::Black);
                stack.pop();
                continue;
            }
            top.1 += 1;
            let child = children[next].as_str();
            match marks.get(child) {
                None | Some(Mark::Black) => {}
                Some(Mark::Grey) => {
                    let pos = stack.iter().position(|(n, _)| *n == child).expect("grey is on stack");
                    let mut cycle: Vec<String> =
                        stack[pos..].iter().map(|(n, _)| n.to_string()).collect();
                    cycle.push(child.to_string());
                    return Some(cycle);
                }
                Some(Mark::White) => {
                    marks.insert(child, Mark::Grey);
                    stack.push((child, 0));
                }
            }
        }
    }
    None
}

/// Full static validation including node constructors. Every finding is returned.
pub fn validate_specs(specs: &[NodeSpec], root_id: &str, ctx: &BuildContext<'_>) -> Vec<GraphError> {
    let mut errors = check_structure(specs, root_id, ctx.registry);
    for spec in specs {
        if let Some(ctor) = ctx.registry.get(&spec.node_type) {
            if let Err(e) = ctor(spec, ctx) {
                errors.push(e);
            }
        }
    }
    errors
}

/// Compiles specs into a validated graph using an empty build context.
pub fn build_graph(specs: &[NodeSpec], root_id: &str, registry: &Registry) -> Result<PipelineGraph, GraphError> {
    build_graph_in(specs, root_id, &BuildContext::new(registry))
}

/// Compiles specs into a validated graph. Stops at the first error.
pub fn build_graph_in(
    specs: &[NodeSpec],
    root_id: &str,
    ctx: &BuildContext<'_>,
) -> Result<PipelineGraph, GraphError> {
    if let Some(err) = check_structure(specs, root_id, ctx.registry).into_iter().next() {
        return Err(err);
    }
    let mut nodes = IndexMap::with_capacity(specs.len());
    for spec in specs {
        let ctor = ctx.registry.get(&spec.node_type).expect("checked above");
        let exec = ctor(spec, ctx)?;
        nodes.insert(
            spec.id.clone(),
            GraphNode {
                spec: spec.clone(),
                exec,
            },
        );
    }

    let mut reachable = HashSet::new();
    let mut frontier = vec![root_id];
    while let Some(id) = frontier.pop() {
        if reachable.insert(id) {
            frontier.extend(nodes[id].spec.children.iter().map(String::as_str));
        }
    }
    let warnings = nodes
        .keys()
        .filter(|k| !reachable.contains(k.as_str()))
        .map(|k| format!("node '{k}' is unreachable from root '{root_id}' and will never execute"))
        .collect::<Vec<_>>();
    for w in &warnings {
        tracing::warn!("{w}");
    }

    Ok(PipelineGraph {
        nodes,
        root_id: root_id.to_string(),
        warnings,
    })
}
