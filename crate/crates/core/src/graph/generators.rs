//! Deterministic graph families and seeded random generators.

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::preference::{Order, Profile};
use crate::rng;

pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::domain(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn gen_path(n: usize) -> Result<Graph> {
    at_least_one(n, "path")?;
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
}

pub fn gen_complete(n: usize) -> Result<Graph> {
    at_least_one(n, "complete graph")?;
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// Star with centre 0.
pub fn gen_star(n: usize) -> Result<Graph> {
    at_least_one(n, "star")?;
    Graph::from_edges(n, (1..n).map(|i| (0, i)))
}

pub fn gen_empty(n: usize) -> Result<Graph> {
    at_least_one(n, "empty graph")?;
    Graph::from_edges(n, std::iter::empty())
}

fn at_least_one(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(format!("{what} needs n >= 1")));
    }
    Ok(())
}

/// Erdős–Rényi graph: every pair `u < v`, in lexicographic order, is kept
/// independently with probability `q`.
pub fn gen_er(n: usize, q: f64, seed: u64) -> Result<Graph> {
    at_least_one(n, "ER graph")?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("edge probability {q} outside [0, 1]")));
    }
    let mut rng = rng::from_seed(seed);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(q) {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
        }
    }
    Ok(Graph::from_adjacency(adj))
}

/// A clique on `0..k` where clique node `i` additionally owns `k - 1`
/// private leaves. `n = k²`.
pub fn gen_clique_with_leaves(k: usize) -> Result<Graph> {
    if k < 2 {
        return Err(Error::domain(format!("clique-with-leaves needs k >= 2, got {k}")));
    }
    let mut edges = Vec::with_capacity(k * (k - 1) / 2 + k * (k - 1));
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v));
        }
    }
    let mut next = k;
    for centre in 0..k {
        for _ in 0..k - 1 {
            edges.push((centre, next));
            next += 1;
        }
    }
    Graph::from_edges(k * k, edges)
}

/// The slow-convergence construction: two rung-connected cycles of length
/// `kappa`, a leaf on the last white node and a clique hanging off the first
/// white node.
#[derive(Clone, Debug)]
pub struct SlowConvergence {
    pub graph: Graph,
    pub kappa: usize,
    /// `w_1 .. w_kappa`.
    pub white_cycle: Vec<usize>,
    /// `g_1 .. g_kappa`; `g_i` is joined to `w_i`.
    pub gray_cycle: Vec<usize>,
    /// The leaf attached to `w_kappa`.
    pub leaf: usize,
    pub clique: Vec<usize>,
}

impl SlowConvergence {
    /// White nodes (white cycle and the leaf) hold `a ≻ b ≻ rest`, gray
    /// nodes (gray cycle and the clique) hold `b ≻ a ≻ rest`, with
    /// `a = 0`, `b = 1` and the rest ascending.
    pub fn initial_profile(&self, alpha: usize) -> Result<Profile> {
        if alpha < 2 {
            return Err(Error::domain("need at least two alternatives"));
        }
        let white = Order::identity(alpha)?;
        let mut gray = white.clone();
        gray.swap_adjacent(0, 1)?;
        let mut profile = Profile::uniform(self.graph.n(), &gray);
        for &v in self.white_cycle.iter().chain(std::iter::once(&self.leaf)) {
            profile.set_order(v, &white);
        }
        Ok(profile)
    }
}

/// Builds the slow-convergence graph on `n >= 9` nodes. Node ids: white
/// cycle `0..kappa`, gray cycle `kappa..2kappa`, leaf `2kappa`, clique after.
pub fn gen_slow_convergence(n: usize) -> Result<SlowConvergence> {
    if n < 9 {
        return Err(Error::domain(format!("slow-convergence graph needs n >= 9, got {n}")));
    }
    let kappa = (n - 3) / 2;
    let white: Vec<usize> = (0..kappa).collect();
    let gray: Vec<usize> = (kappa..2 * kappa).collect();
    let leaf = 2 * kappa;
    let clique: Vec<usize> = (2 * kappa + 1..n).collect();

    let mut edges = Vec::new();
    for i in 0..kappa {
        edges.push((white[i], white[(i + 1) % kappa]));
        edges.push((gray[i], gray[(i + 1) % kappa]));
        edges.push((white[i], gray[i]));
    }
    edges.push((white[kappa - 1], leaf));
    for (i, &u) in clique.iter().enumerate() {
        edges.push((white[0], u));
        for &v in &clique[i + 1..] {
            edges.push((u, v));
        }
    }
    Ok(SlowConvergence {
        graph: Graph::from_edges(n, edges)?,
        kappa,
        white_cycle: white,
        gray_cycle: gray,
        leaf,
        clique,
    })
}

/// Uniform-ish random `d`-regular graph by the pairing model. Point pairs
/// are drawn at random among the unmatched points and rejected when they
/// would form a loop or a repeated edge; the whole pairing restarts only
/// when no admissible pair is left.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::domain(format!("no simple {d}-regular graph on {n} nodes")));
    }
    let mut rng = rng::from_seed(seed);
    'restart: loop {
        let mut points: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
        let mut misses = 0usize;
        while !points.is_empty() {
            let i = rng.random_range(0..points.len());
            let j = rng.random_range(0..points.len());
            let (u, v) = (points[i], points[j]);
            if i != j && u != v && !adj[u as usize].contains(&v) {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
                let (hi, lo) = (i.max(j), i.min(j));
                points.swap_remove(hi);
                points.swap_remove(lo);
                misses = 0;
                continue;
            }
            misses += 1;
            if misses > 64 * points.len() + 64 {
                let admissible = points.iter().enumerate().any(|(x, &a)| {
                    points[x + 1..].iter().any(|&b| a != b && !adj[a as usize].contains(&b))
                });
                if !admissible {
                    continue 'restart;
                }
                misses = 0;
            }
        }
        return Ok(Graph::from_adjacency(adj));
    }
}

/// Result of [`add_random_edges`].
#[derive(Clone, Debug)]
pub struct Augmented {
    pub graph: Graph,
    /// Nodes that could not receive the requested number of new edges.
    pub shortfall: usize,
}

/// Visits nodes in ascending id order and joins each to `k_per_node` nodes
/// drawn uniformly from its current non-neighbours. Edges added for earlier
/// nodes count as existing, so no multi-edges arise.
pub fn add_random_edges(graph: &Graph, k_per_node: usize, seed: u64) -> Result<Augmented> {
    let n = graph.n();
    if k_per_node == 0 {
        return Err(Error::domain("k_per_node must be at least 1"));
    }
    if n < k_per_node + 1 {
        return Err(Error::domain(format!("{n} nodes cannot take {k_per_node} new edges each")));
    }
    let mut rng = rng::from_seed(seed);
    let mut adj: Vec<Vec<u32>> = (0..n).map(|v| graph.neighbors(v).to_vec()).collect();
    let mut shortfall = 0;
    for v in 0..n {
        let eligible = n - 1 - adj[v].len();
        let targets: Vec<u32> = if eligible <= k_per_node {
            if eligible < k_per_node {
                shortfall += 1;
            }
            (0..n as u32)
                .filter(|&u| u as usize != v && adj[v].binary_search(&u).is_err())
                .collect()
        } else {
            let mut picked: Vec<u32> = Vec::with_capacity(k_per_node);
            while picked.len() < k_per_node {
                let u = rng.random_range(0..n as u32);
                if u as usize != v && adj[v].binary_search(&u).is_err() && !picked.contains(&u) {
                    picked.push(u);
                }
            }
            picked
        };
        for u in targets {
            insert_sorted(&mut adj[v], u);
            insert_sorted(&mut adj[u as usize], v as u32);
        }
    }
    Ok(Augmented {
        graph: Graph::from_adjacency(adj).with_labels(graph.labels().to_vec()),
        shortfall,
    })
}

fn insert_sorted(list: &mut Vec<u32>, x: u32) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}
