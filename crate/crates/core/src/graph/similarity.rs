use super::Graph;
use crate::error::{Error, Result};

/// Neighbourhood similarity `|Γ(v) ∩ Γ(u)| / (d(v) + d(u))`, in `[0, 1/2]`.
pub fn similarity(graph: &Graph, v: usize, u: usize) -> Result<f64> {
    if v == u {
        return Err(Error::domain("similarity of a node with itself"));
    }
    if v >= graph.n() || u >= graph.n() {
        return Err(Error::domain(format!("node out of range for n={}", graph.n())));
    }
    let (dv, du) = (graph.degree(v), graph.degree(u));
    if dv == 0 || du == 0 {
        return Err(Error::domain("similarity is undefined for isolated nodes"));
    }
    Ok(common_neighbors(graph.neighbors(v), graph.neighbors(u)) as f64 / (dv + du) as f64)
}

fn common_neighbors(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Similarity of every adjacency slot, aligned with [`Graph::neighbors`]:
/// `weights(v)[i]` is the similarity between `v` and `neighbors(v)[i]`.
#[derive(Clone, Debug)]
pub struct SimilarityTable {
    weights: Vec<f64>,
    offsets: Vec<usize>,
}

impl SimilarityTable {
    pub fn new(graph: &Graph) -> SimilarityTable {
        let mut weights = Vec::with_capacity(2 * graph.m());
        let mut offsets = Vec::with_capacity(graph.n() + 1);
        offsets.push(0);
        for v in 0..graph.n() {
            let nv = graph.neighbors(v);
            for &u in nv {
                let nu = graph.neighbors(u as usize);
                // Both endpoints of an edge have degree >= 1.
                let s = common_neighbors(nv, nu) as f64 / (nv.len() + nu.len()) as f64;
                weights.push(s);
            }
            offsets.push(weights.len());
        }
        debug_assert_eq!(weights.len(), 2 * graph.m());
        SimilarityTable { weights, offsets }
    }

    /// Uniform weight `w` on every slot; mostly useful for tests.
    pub fn constant(graph: &Graph, w: f64) -> SimilarityTable {
        let mut offsets = Vec::with_capacity(graph.n() + 1);
        offsets.push(0);
        for v in 0..graph.n() {
            offsets.push(offsets[v] + graph.degree(v));
        }
        SimilarityTable {
            weights: vec![w; 2 * graph.m()],
            offsets,
        }
    }

    #[inline]
    pub fn weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }
}
