//! SNAP-style edge lists: one `u v` pair per line, `#` comments.

use std::collections::HashMap;

use super::Graph;
use crate::error::{Error, Result};

/// Parsed edge list plus what was thrown away on the way in.
#[derive(Clone, Debug)]
pub struct EdgeListReport {
    pub graph: Graph,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    /// Nodes outside the largest connected component.
    pub dropped_nodes: usize,
}

impl EdgeListReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.self_loops > 0 {
            out.push(format!("dropped {} self-loops", self.self_loops));
        }
        if self.duplicate_edges > 0 {
            out.push(format!("dropped {} duplicate edges", self.duplicate_edges));
        }
        if self.dropped_nodes > 0 {
            out.push(format!(
                "graph is disconnected; kept the largest component, dropped {} nodes",
                self.dropped_nodes
            ));
        }
        out
    }
}

/// Parses an edge list. Ids are remapped to `0..n` in order of first
/// appearance; the original ids are kept as node labels. Only the largest
/// connected component survives.
pub fn parse_edge_list(text: &str) -> Result<EdgeListReport> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut self_loops = 0;

    let mut intern = |raw: u64| -> usize {
        *ids.entry(raw).or_insert_with(|| {
            labels.push(raw);
            labels.len() - 1
        })
    };

    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two ids, got {line:?}"),
            });
        };
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad node id {s:?}: {e}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        let (u, v) = (intern(a), intern(b));
        if u == v {
            self_loops += 1;
        } else {
            edges.push((u.min(v), u.max(v)));
        }
    }

    let raw_edges = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicate_edges = raw_edges - edges.len();
    if edges.is_empty() {
        return Err(Error::EmptyInput("edge list contains no edges".to_string()));
    }

    let full = Graph::from_edges(labels.len(), edges)?.with_labels(labels);
    let graph = if full.is_connected() {
        full.clone()
    } else {
        full.largest_component()
    };
    Ok(EdgeListReport {
        dropped_nodes: full.n() - graph.n(),
        graph,
        self_loops,
        duplicate_edges,
    })
}

pub fn from_edge_list(text: &str) -> Result<Graph> {
    parse_edge_list(text).map(|r| r.graph)
}

impl Graph {
    /// Edge list text using the node labels, one edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.m() * 12);
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", self.label(u), self.label(v)));
        }
        out
    }
}
