//! Incremental bookkeeping for the majority rule so that asynchronous runs
//! can detect fixation without rescanning the whole graph every round.

use crate::graph::Graph;
use crate::preference::{graph_potential, Profile};

/// Tracks, for every node `v` and ordered pair `(x, y)`, how many
/// neighbours of `v` rank `x` above `y`, together with which adjacent slots
/// of each node currently admit a swap.
#[derive(Clone, Debug)]
pub struct MajorityTracker {
    alpha: usize,
    /// `ahead[(v * α + x) * α + y]`.
    ahead: Vec<u32>,
    /// `enabled[v * (α - 1) + pos]`: swapping positions `pos`, `pos + 1` of
    /// `v` is an effective update.
    enabled: Vec<bool>,
    enabled_total: usize,
    potential: u64,
}

impl MajorityTracker {
    pub fn new(graph: &Graph, profile: &Profile) -> MajorityTracker {
        let (n, alpha) = (profile.n(), profile.alpha());
        let mut ahead = vec![0u32; n * alpha * alpha];
        for v in 0..n {
            let base = v * alpha * alpha;
            for &u in graph.neighbors(v) {
                let seq = profile.sequence(u as usize);
                for (i, &x) in seq.iter().enumerate() {
                    for &y in &seq[i + 1..] {
                        ahead[base + x as usize * alpha + y as usize] += 1;
                    }
                }
            }
        }
        let mut tracker = MajorityTracker {
            alpha,
            ahead,
            enabled: vec![false; n * (alpha - 1)],
            enabled_total: 0,
            potential: graph_potential(graph, profile),
        };
        for v in 0..n {
            for pos in 0..alpha - 1 {
                tracker.refresh(graph, profile, v, pos);
            }
        }
        tracker
    }

    #[inline]
    fn ahead(&self, v: usize, x: usize, y: usize) -> u32 {
        self.ahead[(v * self.alpha + x) * self.alpha + y]
    }

    /// Number of neighbours of `v` that rank `b` above `a` when `v` ranks
    /// `a` above `b`, i.e. that disagree with `v` on the pair.
    #[inline]
    pub fn disagreeing(&self, profile: &Profile, v: usize, a: usize, b: usize) -> usize {
        if profile.prefers(v, a, b) {
            self.ahead(v, b, a) as usize
        } else {
            self.ahead(v, a, b) as usize
        }
    }

    fn refresh(&mut self, graph: &Graph, profile: &Profile, v: usize, pos: usize) {
        let (x, y) = (profile.at(v, pos), profile.at(v, pos + 1));
        let now = 2 * self.ahead(v, y, x) as usize > graph.degree(v);
        let slot = &mut self.enabled[v * (self.alpha - 1) + pos];
        if now != *slot {
            if now {
                self.enabled_total += 1;
            } else {
                self.enabled_total -= 1;
            }
            *slot = now;
        }
    }

    /// Whether `v` would swap the unordered pair `{a, b}`.
    #[inline]
    pub fn would_swap(&self, profile: &Profile, v: usize, a: usize, b: usize) -> bool {
        if !profile.adjacent(v, a, b) {
            return false;
        }
        let pos = profile.rank(v, a).min(profile.rank(v, b));
        self.enabled[v * (self.alpha - 1) + pos]
    }

    /// Performs the swap of `a`, `b` at `v` on `profile` and updates the
    /// counts. Returns the change in potential, always negative for an
    /// enabled swap.
    pub fn apply_swap(&mut self, graph: &Graph, profile: &mut Profile, v: usize, a: usize, b: usize) -> i64 {
        // (x, y) is v's order of the pair before the swap.
        let (x, y) = if profile.prefers(v, a, b) { (a, b) } else { (b, a) };
        let deg = graph.degree(v);
        let disagree = self.ahead(v, y, x) as i64;
        let delta = (deg as i64 - disagree) - disagree;
        profile.swap_adjacent(v, a, b);
        let pos = profile.rank(v, a).min(profile.rank(v, b));
        for p in pos.saturating_sub(1)..=(pos + 1).min(self.alpha - 2) {
            self.refresh(graph, profile, v, p);
        }
        let alpha = self.alpha;
        for &u in graph.neighbors(v) {
            let u = u as usize;
            let base = u * alpha * alpha;
            self.ahead[base + x * alpha + y] -= 1;
            self.ahead[base + y * alpha + x] += 1;
            if profile.adjacent(u, x, y) {
                let p = profile.rank(u, x).min(profile.rank(u, y));
                self.refresh(graph, profile, u, p);
            }
        }
        self.potential = (self.potential as i64 + delta) as u64;
        delta
    }

    pub fn is_fixed(&self) -> bool {
        self.enabled_total == 0
    }

    pub fn enabled_slots(&self) -> usize {
        self.enabled_total
    }

    pub fn potential(&self) -> u64 {
        self.potential
    }
}
