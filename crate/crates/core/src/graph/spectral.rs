//! Second-largest absolute eigenvalue of the normalised adjacency matrix
//! `M = D^{-1/2} A D^{-1/2}` and the expander mixing inequality.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::{Graph, NodeSet};
use crate::error::{Error, Result};
use crate::rng;

/// Graphs with at most this many nodes use the dense eigensolver.
pub const DENSE_CUTOVER: usize = 2000;

const TOLERANCE: f64 = 1e-8;
const KRYLOV_DIM: usize = 120;
const MAX_RESTARTS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralMethod {
    /// Pick by size: dense up to [`DENSE_CUTOVER`] nodes, Lanczos beyond.
    Auto,
    Dense,
    /// Lanczos with full reorthogonalisation on the complement of the top
    /// eigenvector `D^{1/2} 1`.
    Iterative,
}

/// `λ(G) = max_{i >= 2} |λ_i(M)|` for a connected graph.
pub fn lambda(graph: &Graph) -> Result<f64> {
    lambda_with(graph, SpectralMethod::Auto)
}

pub fn lambda_with(graph: &Graph, method: SpectralMethod) -> Result<f64> {
    if graph.n() < 2 {
        return Err(Error::domain("λ needs at least two nodes"));
    }
    if !graph.is_connected() {
        return Err(Error::domain("λ is only defined here for connected graphs"));
    }
    let value = match method {
        SpectralMethod::Dense => dense(graph),
        SpectralMethod::Iterative => lanczos(graph)?,
        SpectralMethod::Auto if graph.n() <= DENSE_CUTOVER => dense(graph),
        SpectralMethod::Auto => lanczos(graph)?,
    };
    Ok(value.clamp(0.0, 1.0))
}

fn inverse_sqrt_degrees(graph: &Graph) -> Vec<f64> {
    (0..graph.n())
        .map(|v| 1.0 / (graph.degree(v) as f64).sqrt())
        .collect()
}

fn dense(graph: &Graph) -> f64 {
    let n = graph.n();
    let s = inverse_sqrt_degrees(graph);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (u, v) in graph.edges() {
        let w = s[u] * s[v];
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig[1].abs().max(eig[n - 1].abs())
}

struct Operator<'a> {
    graph: &'a Graph,
    scale: Vec<f64>,
    /// Unit top eigenvector `D^{1/2} 1 / ||D^{1/2} 1||`.
    top: Vec<f64>,
}

impl Operator<'_> {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (v, out) in y.iter_mut().enumerate() {
            let acc: f64 = self
                .graph
                .neighbors(v)
                .iter()
                .map(|&u| self.scale[u as usize] * x[u as usize])
                .sum();
            *out = self.scale[v] * acc;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], top: &[f64]) {
    // Two passes of classical Gram-Schmidt keep the basis orthogonal to
    // working precision.
    for _ in 0..2 {
        let c = dot(w, top);
        axpy(-c, top, w);
        for b in basis {
            let c = dot(w, b);
            axpy(-c, b, w);
        }
    }
}

fn lanczos(graph: &Graph) -> Result<f64> {
    let n = graph.n();
    let scale = inverse_sqrt_degrees(graph);
    let mut top: Vec<f64> = (0..n).map(|v| (graph.degree(v) as f64).sqrt()).collect();
    normalize(&mut top);
    let op = Operator { graph, scale, top };

    let mut rng = rng::from_seed(0x5EED_1A4B);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let dim = KRYLOV_DIM.min(n - 1);

    for _ in 0..MAX_RESTARTS {
        orthogonalize(&mut start, &[], &op.top);
        if normalize(&mut start) == 0.0 {
            return Err(Error::domain("degenerate Lanczos start vector"));
        }
        let outcome = lanczos_pass(&op, &start, dim);
        if outcome.converged {
            return Ok(outcome.value);
        }
        start = outcome.restart;
    }
    Err(Error::domain(format!(
        "Lanczos did not reach tolerance {TOLERANCE} after {MAX_RESTARTS} restarts"
    )))
}

struct Pass {
    value: f64,
    converged: bool,
    restart: Vec<f64>,
}

fn lanczos_pass(op: &Operator<'_>, start: &[f64], dim: usize) -> Pass {
    let n = start.len();
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alphas.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, &basis, &op.top);
        let b = dot(&w, &w).sqrt();

        let exhausted = b < 1e-12 || basis.len() == dim;
        if exhausted || basis.len().is_multiple_of(8) {
            let k = alphas.len();
            let mut t = DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alphas[i];
                if i + 1 < k {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (imin, imax) = extremal_indices(&eig.eigenvalues);
            let res_min = b * eig.eigenvectors[(k - 1, imin)].abs();
            let res_max = b * eig.eigenvectors[(k - 1, imax)].abs();
            let (tmin, tmax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
            let value = tmin.abs().max(tmax.abs());
            let invariant = b < 1e-12;
            let converged = invariant || (res_min < TOLERANCE && res_max < TOLERANCE);
            if converged || exhausted {
                let ritz = |idx: usize| -> DVector<f64> {
                    let mut x = DVector::<f64>::zeros(n);
                    for (i, q) in basis.iter().enumerate().take(k) {
                        let c = eig.eigenvectors[(i, idx)];
                        for (xi, qi) in x.iter_mut().zip(q) {
                            *xi += c * qi;
                        }
                    }
                    x
                };
                let restart = if converged {
                    Vec::new()
                } else {
                    (ritz(imin) + ritz(imax)).iter().copied().collect()
                };
                return Pass {
                    value,
                    converged,
                    restart,
                };
            }
        }
        betas.push(b);
        let mut next = w.clone();
        next.iter_mut().for_each(|x| *x /= b);
        basis.push(next);
    }
}

fn extremal_indices(values: &DVector<f64>) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    (imin, imax)
}

/// Both sides of the mixing inequality for a `d`-regular graph:
/// `lhs = Σ_v (|Γ(v) ∩ S| - d|S|/n)²`, `rhs = (λd)² |S| (1 - |S|/n)`.
pub fn mixing_check(graph: &Graph, set: &NodeSet) -> Result<(f64, f64)> {
    let lam = lambda(graph)?;
    mixing_sides(graph, set, lam)
}

/// [`mixing_check`] with a precomputed `λ`.
pub fn mixing_sides(graph: &Graph, set: &NodeSet, lambda: f64) -> Result<(f64, f64)> {
    let d = graph
        .regular_degree()
        .ok_or_else(|| Error::domain("mixing inequality needs a regular graph"))?;
    if set.universe() != graph.n() {
        return Err(Error::domain("node set and graph sizes differ"));
    }
    let n = graph.n() as f64;
    let s = set.len() as f64;
    let mean = d as f64 * s / n;
    let lhs = (0..graph.n())
        .map(|v| {
            let hits = graph
                .neighbors(v)
                .iter()
                .filter(|&&u| set.contains(u as usize))
                .count() as f64;
            (hits - mean).powi(2)
        })
        .sum();
    let rhs = (lambda * d as f64).powi(2) * s * (1.0 - s / n);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_cycle, gen_er, gen_path, gen_random_regular};

    #[test]
    fn small_closed_forms() {
        for method in [SpectralMethod::Dense, SpectralMethod::Iterative] {
            let k4 = lambda_with(&gen_complete(4).unwrap(), method).unwrap();
            assert!((k4 - 1.0 / 3.0).abs() < 1e-8, "{method:?}: {k4}");
            let c4 = lambda_with(&gen_cycle(4).unwrap(), method).unwrap();
            assert!((c4 - 1.0).abs() < 1e-8, "{method:?}: {c4}");
            let c5 = lambda_with(&gen_cycle(5).unwrap(), method).unwrap();
            assert!((c5 - (std::f64::consts::PI / 5.0).cos()).abs() < 1e-6, "{method:?}: {c5}");
        }
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(lambda(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn dense_and_iterative_agree() {
        let graphs = vec![
            gen_cycle(101).unwrap(),
            gen_path(40).unwrap(),
            gen_random_regular(300, 4, 2).unwrap(),
            gen_er(400, 0.05, 17).unwrap().largest_component(),
            gen_complete(60).unwrap(),
        ];
        for g in graphs {
            let a = lambda_with(&g, SpectralMethod::Dense).unwrap();
            let b = lambda_with(&g, SpectralMethod::Iterative).unwrap();
            assert!((a - b).abs() < 1e-6, "n={} dense={a} iterative={b}", g.n());
        }
    }

    #[test]
    fn mixing_edge_sets() {
        let g = gen_complete(6).unwrap();
        let (l, r) = mixing_check(&g, &NodeSet::new(6)).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let (l, r) = mixing_check(&g, &NodeSet::full(6)).unwrap();
        assert!(l.abs() < 1e-12 && r.abs() < 1e-12);
        let (l, r) = mixing_check(&g, &NodeSet::from_nodes(6, [0, 1, 2])).unwrap();
        assert!(l <= r + 1e-12, "{l} > {r}");
    }

    #[test]
    fn mixing_needs_regular_graph() {
        let g = gen_path(4).unwrap();
        assert!(mixing_sides(&g, &NodeSet::new(4), 0.5).is_err());
    }
}
