//! DOT export of compiled pipelines, plus a small DOT reader used to check
//! the output.

use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::graph::PipelineGraph;

/// DOT source text for a pipeline graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotDocument {
    pub text: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    /// Draw the bodies of encapsulation and loop nodes as clusters.
    pub expand: bool,
}

/// Quoted DOT string literal.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn is_plain(s: &str) -> bool {
    let ident = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.starts_with(|c: char| c.is_ascii_digit());
    let number = !s.is_empty() && s.parse::<f64>().is_ok() && s.chars().all(|c| c.is_ascii_digit() || c == '.' || c == '-');
    ident || number
}

fn attr_value(v: &str) -> String {
    if is_plain(v) {
        v.to_string()
    } else {
        quote(v)
    }
}

fn label_for(id: &str, node_type: &str) -> String {
    // The `\n` escape is interpreted by DOT as a line break.
    format!("{}\\n({})", escape_inner(id), escape_inner(node_type))
}

fn escape_inner(s: &str) -> String {
    let q = quote(s);
    q[1..q.len() - 1].to_string()
}

fn write_nodes(out: &mut String, graph: &PipelineGraph, prefix: &str, indent: &str, opts: DotOptions) {
    let mut nodes: Vec<_> = graph.nodes().collect();
    nodes.sort_by(|a, b| a.spec.id.cmp(&b.spec.id));
    for node in nodes {
        let spec = &node.spec;
        let full = format!("{prefix}{}", spec.id);
        let mut attrs = vec![format!("label=\"{}\"", label_for(&spec.id, &spec.node_type))];
        for (k, v) in &spec.draw_options {
            if k == "label" {
                attrs[0] = format!("label={}", attr_value(v));
            } else if is_plain(k) {
                attrs.push(format!("{k}={}", attr_value(v)));
            }
        }
        let _ = writeln!(out, "{indent}{} [{}];", quote(&full), attrs.join(", "));
        if opts.expand {
            if let Some(body) = node.exec.subgraph() {
                let inner_prefix = format!("{full}/");
                let _ = writeln!(out, "{indent}subgraph {} {{", quote(&format!("cluster_{full}")));
                let _ = writeln!(out, "{indent}  label={};", quote(&full));
                let _ = writeln!(out, "{indent}  style=dashed;");
                write_nodes(out, body, &inner_prefix, &format!("{indent}  "), opts);
                write_edges(out, body, &inner_prefix, &format!("{indent}  "), opts);
                let _ = writeln!(out, "{indent}}}");
                let _ = writeln!(
                    out,
                    "{indent}{} -> {} [style=dashed];",
                    quote(&full),
                    quote(&format!("{inner_prefix}{}", body.root_id()))
                );
            }
        }
    }
}

fn write_edges(out: &mut String, graph: &PipelineGraph, prefix: &str, indent: &str, _: DotOptions) {
    let mut ids: Vec<&str> = graph.nodes().map(|n| n.spec.id.as_str()).collect();
    ids.sort();
    for id in ids {
        for child in graph.children(id) {
            let _ = writeln!(
                out,
                "{indent}{} -> {};",
                quote(&format!("{prefix}{id}")),
                quote(&format!("{prefix}{child}"))
            );
        }
    }
}

/// DOT for `graph`: nodes sorted by id, then edges by parent id in child order.
pub fn to_dot(graph: &PipelineGraph) -> DotDocument {
    to_dot_with(graph, DotOptions::default())
}

pub fn to_dot_with(graph: &PipelineGraph, opts: DotOptions) -> DotDocument {
    let mut text = String::from("digraph pipeline {\n");
    write_nodes(&mut text, graph, "", "  ", opts);
    write_edges(&mut text, graph, "", "  ", opts);
    text.push_str("}\n");
    DotDocument { text }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("DOT parse error at byte {offset}: {message}")]
pub struct DotParseError {
    pub offset: usize,
    pub message: String,
}

/// What the reader extracts from a DOT document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DotGraph {
    pub name: Option<String>,
    pub directed: bool,
    /// Explicit node statements with their attributes, in source order.
    pub nodes: IndexMap<String, Vec<(String, String)>>,
    /// Edges in source order; chains `a -> b -> c` contribute one edge per hop.
    pub edges: Vec<(String, String)>,
    pub subgraphs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Eq,
    Arrow,
    Line,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, DotParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, m: &str| DotParseError {
        offset,
        message: m.to_string(),
    };
    while i < b.len() {
        let c = b[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let end = src[i + 2..].find("*/").ok_or_else(|| err(i, "unterminated comment"))?;
                i += end + 4;
            }
            b'#' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' | b'}' | b'[' | b']' | b';' | b',' | b'=' => {
                out.push((
                    start,
                    match c {
                        b'{' => Tok::LBrace,
                        b'}' => Tok::RBrace,
                        b'[' => Tok::LBracket,
                        b']' => Tok::RBracket,
                        b';' => Tok::Semi,
                        b',' => Tok::Comma,
                        _ => Tok::Eq,
                    },
                ));
                i += 1;
            }
            b'-' if b.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Arrow));
                i += 2;
            }
            b'-' if b.get(i + 1) == Some(&b'-') => {
                out.push((start, Tok::Line));
                i += 2;
            }
            b'"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    let ch = src[i..].chars().next().ok_or_else(|| err(start, "unterminated string"))?;
                    match ch {
                        '"' => {
                            i += 1;
                            break;
                        }
                        '\\' if src[i + 1..].starts_with('"') => {
                            s.push('"');
                            i += 2;
                        }
                        '\\' if src[i + 1..].starts_with('\\') => {
                            s.push('\\');
                            i += 2;
                        }
                        _ => {
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push((start, Tok::Id(s)));
            }
            c if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'-' || c >= 0x80 => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.' || b[i] >= 0x80 || (b[i] == b'-' && i == start)) {
                    i += 1;
                }
                out.push((start, Tok::Id(src[start..i].to_string())));
            }
            _ => return Err(err(i, &format!("unexpected character '{}'", c as char))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    graph: DotGraph,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, DotParseError> {
        Err(DotParseError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), DotParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {want:?}"))
        }
    }

    fn id(&mut self) -> Result<String, DotParseError> {
        match self.peek() {
            Some(Tok::Id(_)) => match self.next() {
                Some(Tok::Id(s)) => Ok(s),
                _ => unreachable!(),
            },
            _ => self.fail("expected an identifier"),
        }
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, DotParseError> {
        let mut attrs = Vec::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            while self.peek() != Some(&Tok::RBracket) {
                let k = self.id()?;
                self.expect(Tok::Eq)?;
                let v = self.id()?;
                attrs.push((k, v));
                if matches!(self.peek(), Some(Tok::Comma | Tok::Semi)) {
                    self.pos += 1;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(attrs)
    }

    fn stmt_list(&mut self) -> Result<(), DotParseError> {
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    return Ok(());
                }
                None => return self.fail("unexpected end of input"),
                Some(Tok::Semi) => self.pos += 1,
                _ => self.stmt()?,
            }
        }
    }

    fn stmt(&mut self) -> Result<(), DotParseError> {
        if let Some(Tok::Id(word)) = self.peek() {
            let lower = word.to_ascii_lowercase();
            if lower == "subgraph" {
                self.pos += 1;
                if let Some(Tok::Id(_)) = self.peek() {
                    let name = self.id()?;
                    self.graph.subgraphs.push(name);
                }
                return self.stmt_list();
            }
            if matches!(lower.as_str(), "graph" | "node" | "edge") && self.toks.get(self.pos + 1).map(|t| &t.1) == Some(&Tok::LBracket) {
                self.pos += 1;
                self.attr_list()?;
                return Ok(());
            }
        }
        if self.peek() == Some(&Tok::LBrace) {
            return self.stmt_list();
        }
        let first = self.id()?;
        if self.peek() == Some(&Tok::Eq) {
            self.pos += 1;
            self.id()?;
            return Ok(());
        }
        let mut chain = vec![first];
        while let Some(op) = self.peek().cloned() {
            let ok = match op {
                Tok::Arrow => self.graph.directed,
                Tok::Line => !self.graph.directed,
                _ => break,
            };
            if !ok {
                return self.fail("edge operator does not match graph kind");
            }
            self.pos += 1;
            chain.push(self.id()?);
        }
        let attrs = self.attr_list()?;
        if chain.len() == 1 {
            self.graph.nodes.entry(chain.remove(0)).or_default().extend(attrs);
        } else {
            for w in chain.windows(2) {
                self.graph.edges.push((w[0].clone(), w[1].clone()));
            }
        }
        Ok(())
    }
}

/// Reads the subset of DOT this crate emits: (di)graph, subgraphs, node and
/// edge statements with attribute lists, and graph attribute assignments.
pub fn parse_dot(src: &str) -> Result<DotGraph, DotParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        end: src.len(),
        graph: DotGraph::default(),
    };
    if let Some(Tok::Id(w)) = p.peek() {
        if w.eq_ignore_ascii_case("strict") {
            p.pos += 1;
        }
    }
    match p.id()?.to_ascii_lowercase().as_str() {
        "digraph" => p.graph.directed = true,
        "graph" => p.graph.directed = false,
        _ => return p.fail("expected 'graph' or 'digraph'"),
    }
    if let Some(Tok::Id(_)) = p.peek() {
        p.graph.name = Some(p.id()?);
    }
    p.stmt_list()?;
    if p.pos < p.toks.len() {
        return p.fail("trailing input after graph");
    }
    Ok(p.graph)
}
