//! Undirected simple graphs in compressed adjacency form.

mod generators;
mod io;
mod similarity;
mod spectral;

pub use generators::{
    add_random_edges, gen_clique_with_leaves, gen_complete, gen_cycle, gen_empty, gen_er,
    gen_path, gen_random_regular, gen_slow_convergence, gen_star, Augmented, SlowConvergence,
};
pub use io::{from_edge_list, parse_edge_list, EdgeListReport};
pub use similarity::{similarity, SimilarityTable};
pub use spectral::{lambda, lambda_with, mixing_check, mixing_sides, SpectralMethod, DENSE_CUTOVER};

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected simple graph on nodes `0..n`.
///
/// Neighbour lists are sorted and deduplicated; the edge `{u, v}` appears in
/// both lists. The graph is immutable once built and can be shared freely
/// between simulation workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// Original node labels, e.g. the ids of an ingested edge list.
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Self-loops and repeated edges are
    /// dropped, the rest is symmetrised.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::domain(format!("{n} nodes exceed the u32 id space")));
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!("edge ({u}, {v}) out of range for n={n}")));
            }
            if u == v {
                continue;
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        Ok(Self::from_adjacency(adj))
    }

    pub(crate) fn from_adjacency(mut adj: Vec<Vec<u32>>) -> Graph {
        let n = adj.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            list.retain(|&u| u as usize != v);
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            labels: (0..n as u64).collect(),
        }
    }

    pub(crate) fn with_labels(mut self, labels: Vec<u64>) -> Graph {
        debug_assert_eq!(labels.len(), self.n());
        self.labels = labels;
        self
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Original label of node `v` (identity unless ingested from a file).
    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// The common degree when the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.n() == 0 {
            return None;
        }
        let d = self.degree(0);
        (1..self.n()).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Connected component id of every node, numbered in order of the lowest
    /// node id they contain.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &u in self.neighbors(v) {
                    let u = u as usize;
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        queue.push_back(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().iter().all(|&c| c == 0)
    }

    /// The induced subgraph on the largest connected component (lowest
    /// component id wins ties), relabelled densely in ascending id order.
    /// Labels follow the kept nodes.
    pub fn largest_component(&self) -> Graph {
        let comp = self.components();
        let mut sizes = vec![0usize; comp.iter().max().map_or(0, |&c| c + 1)];
        for &c in &comp {
            sizes[c] += 1;
        }
        let Some(best) = (0..sizes.len()).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
            return self.clone();
        };
        let keep: Vec<usize> = (0..self.n()).filter(|&v| comp[v] == best).collect();
        self.induced(&keep)
    }

    /// Subgraph induced by `keep` (ascending node ids), relabelled `0..keep.len()`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![u32::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i as u32;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|&u| {
                        let i = index[u as usize];
                        (i != u32::MAX).then_some(i)
                    })
                    .collect()
            })
            .collect();
        let labels = keep.iter().map(|&v| self.labels[v]).collect();
        Graph::from_adjacency(adj).with_labels(labels)
    }

    /// Full scan of the structural invariants: sorted simple neighbour lists,
    /// symmetry, and an even slot count.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for v in 0..n {
            let nb = self.neighbors(v);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::contract(format!("neighbours of {v} not strictly sorted")));
                }
            }
            for &u in nb {
                let u = u as usize;
                if u == v {
                    return Err(Error::contract(format!("self-loop at {v}")));
                }
                if u >= n || !self.has_edge(u, v) {
                    return Err(Error::contract(format!("edge ({v}, {u}) not symmetric")));
                }
            }
        }
        if !self.targets.len().is_multiple_of(2) {
            return Err(Error::contract("odd adjacency slot count".to_string()));
        }
        Ok(())
    }
}

/// A subset of `0..n`, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSet {
    n: usize,
    words: Vec<u64>,
}

impl NodeSet {
    pub fn new(n: usize) -> NodeSet {
        NodeSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> NodeSet {
        let mut s = NodeSet::new(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(n: usize, nodes: I) -> NodeSet {
        let mut s = NodeSet::new(n);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    /// Size of the ground set.
    pub fn universe(&self) -> usize {
        self.n
    }

    /// Inserts `v`; returns whether it was newly added.
    ///
    /// Panics if `v` is outside `0..n`.
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.n, "node {v} out of range for a set over {} nodes", self.n);
        let (w, b) = (v / 64, v % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        assert_eq!(self.n, other.n, "node sets over different universes");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }
}
