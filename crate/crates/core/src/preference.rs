//! Strict linear orders over alternatives `0..alpha`, profiles, and the
//! pairwise statistics computed on them.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::rng;

/// Largest supported number of alternatives (positions are stored as `u8`).
pub const MAX_ALTERNATIVES: usize = 255;

/// A strict linear order. `at[p]` is the alternative in position `p`
/// (0 = most preferred) and `rank[a]` the position of alternative `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Order {
    rank: Vec<u8>,
    at: Vec<u8>,
}

impl Order {
    /// `0 ≻ 1 ≻ … ≻ alpha-1`.
    pub fn identity(alpha: usize) -> Result<Order> {
        check_alpha(alpha)?;
        let ids: Vec<u8> = (0..alpha as u8).collect();
        Ok(Order {
            rank: ids.clone(),
            at: ids,
        })
    }

    /// Builds an order from its top-to-bottom alternative sequence.
    pub fn from_sequence(seq: &[usize]) -> Result<Order> {
        let alpha = seq.len();
        check_alpha(alpha)?;
        let mut rank = vec![u8::MAX; alpha];
        for (pos, &a) in seq.iter().enumerate() {
            if a >= alpha || rank[a] != u8::MAX {
                return Err(Error::domain(format!("{seq:?} is not a permutation of 0..{alpha}")));
            }
            rank[a] = pos as u8;
        }
        Ok(Order {
            rank,
            at: seq.iter().map(|&a| a as u8).collect(),
        })
    }

    pub fn alpha(&self) -> usize {
        self.at.len()
    }

    /// Zero-based position of `a` (0 = top).
    pub fn rank_of(&self, a: usize) -> usize {
        self.rank[a] as usize
    }

    /// Alternative at zero-based position `pos`.
    pub fn at(&self, pos: usize) -> usize {
        self.at[pos] as usize
    }

    /// Top-to-bottom sequence.
    pub fn sequence(&self) -> Vec<usize> {
        self.at.iter().map(|&a| a as usize).collect()
    }

    pub fn reversed(&self) -> Order {
        let seq: Vec<usize> = self.sequence().into_iter().rev().collect();
        Order::from_sequence(&seq).expect("reversal of a permutation")
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::domain(format!("alternatives must differ, got {a} twice")));
        }
        if a >= self.alpha() || b >= self.alpha() {
            return Err(Error::domain(format!("alternative out of range for alpha={}", self.alpha())));
        }
        Ok(())
    }

    /// Whether `a ≻ b`.
    pub fn prefers(&self, a: usize, b: usize) -> Result<bool> {
        self.check_pair(a, b)?;
        Ok(self.rank[a] < self.rank[b])
    }

    pub fn adjacent_in(&self, a: usize, b: usize) -> Result<bool> {
        self.check_pair(a, b)?;
        Ok(self.rank[a].abs_diff(self.rank[b]) == 1)
    }

    /// Exchanges two adjacent alternatives.
    pub fn swap_adjacent(&mut self, a: usize, b: usize) -> Result<()> {
        if !self.adjacent_in(a, b)? {
            return Err(Error::contract(format!("{a} and {b} are not adjacent in {self}")));
        }
        let (ra, rb) = (self.rank[a], self.rank[b]);
        self.rank[a] = rb;
        self.rank[b] = ra;
        self.at[ra as usize] = b as u8;
        self.at[rb as usize] = a as u8;
        Ok(())
    }

    /// Iterator over the ordered pairs `(a, b)` with `a ≻ b`.
    pub fn preferred_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let alpha = self.alpha();
        (0..alpha).flat_map(move |i| (i + 1..alpha).map(move |j| (self.at(i), self.at(j))))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.at.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Order> {
        let seq = s
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::domain(format!("bad alternative {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Order::from_sequence(&seq)
    }
}

fn check_alpha(alpha: usize) -> Result<()> {
    if !(2..=MAX_ALTERNATIVES).contains(&alpha) {
        return Err(Error::domain(format!(
            "alternative count {alpha} outside 2..={MAX_ALTERNATIVES}"
        )));
    }
    Ok(())
}

/// One order per node, stored flat: node `v` owns `rank[v*α .. (v+1)*α]`
/// and the matching `at` slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    alpha: usize,
    rank: Vec<u8>,
    at: Vec<u8>,
}

impl Profile {
    /// Every node holds `order`.
    pub fn uniform(n: usize, order: &Order) -> Profile {
        Profile {
            alpha: order.alpha(),
            rank: order.rank.repeat(n),
            at: order.at.repeat(n),
        }
    }

    pub fn from_orders(orders: &[Order]) -> Result<Profile> {
        let Some(first) = orders.first() else {
            return Err(Error::EmptyInput("profile without nodes".to_string()));
        };
        let alpha = first.alpha();
        if orders.iter().any(|o| o.alpha() != alpha) {
            return Err(Error::domain("orders of a profile must share one alternative count"));
        }
        Ok(Profile {
            alpha,
            rank: orders.iter().flat_map(|o| o.rank.iter().copied()).collect(),
            at: orders.iter().flat_map(|o| o.at.iter().copied()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.at.len() / self.alpha
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn order(&self, v: usize) -> Order {
        let r = v * self.alpha..(v + 1) * self.alpha;
        Order {
            rank: self.rank[r.clone()].to_vec(),
            at: self.at[r].to_vec(),
        }
    }

    pub fn orders(&self) -> impl Iterator<Item = Order> + '_ {
        (0..self.n()).map(|v| self.order(v))
    }

    pub fn set_order(&mut self, v: usize, order: &Order) {
        assert_eq!(order.alpha(), self.alpha, "alternative count mismatch");
        let r = v * self.alpha..(v + 1) * self.alpha;
        self.rank[r.clone()].copy_from_slice(&order.rank);
        self.at[r].copy_from_slice(&order.at);
    }

    /// Copies node `src`'s order of `from` onto node `dst` of `self`.
    #[inline]
    pub(crate) fn copy_from(&mut self, dst: usize, from: &Profile, src: usize) {
        let a = self.alpha;
        self.rank[dst * a..(dst + 1) * a].copy_from_slice(&from.rank[src * a..(src + 1) * a]);
        self.at[dst * a..(dst + 1) * a].copy_from_slice(&from.at[src * a..(src + 1) * a]);
    }

    #[inline]
    pub fn rank(&self, v: usize, a: usize) -> usize {
        self.rank[v * self.alpha + a] as usize
    }

    #[inline]
    pub fn at(&self, v: usize, pos: usize) -> usize {
        self.at[v * self.alpha + pos] as usize
    }

    /// Whether node `v` ranks `a` above `b`. No range checks beyond slicing.
    #[inline]
    pub fn prefers(&self, v: usize, a: usize, b: usize) -> bool {
        let base = v * self.alpha;
        self.rank[base + a] < self.rank[base + b]
    }

    #[inline]
    pub fn adjacent(&self, v: usize, a: usize, b: usize) -> bool {
        let base = v * self.alpha;
        self.rank[base + a].abs_diff(self.rank[base + b]) == 1
    }

    /// Swaps `a` and `b` in node `v`'s order; they must be adjacent.
    #[inline]
    pub fn swap_adjacent(&mut self, v: usize, a: usize, b: usize) {
        debug_assert!(self.adjacent(v, a, b));
        let base = v * self.alpha;
        let (ra, rb) = (self.rank[base + a], self.rank[base + b]);
        self.rank[base + a] = rb;
        self.rank[base + b] = ra;
        self.at[base + ra as usize] = b as u8;
        self.at[base + rb as usize] = a as u8;
    }

    /// Top-to-bottom slice of node `v`'s order.
    #[inline]
    pub fn sequence(&self, v: usize) -> &[u8] {
        &self.at[v * self.alpha..(v + 1) * self.alpha]
    }

    pub fn holds(&self, v: usize, order: &Order) -> bool {
        self.sequence(v) == order.at.as_slice()
    }

    /// `n_≻`: number of nodes holding exactly `order`.
    pub fn count_holding(&self, order: &Order) -> usize {
        (0..self.n()).filter(|&v| self.holds(v, order)).count()
    }

    /// Fraction of nodes holding exactly `order`.
    pub fn density(&self, order: &Order) -> f64 {
        self.count_holding(order) as f64 / self.n() as f64
    }

    /// Whether all nodes hold the same order.
    pub fn is_consensus(&self) -> bool {
        let first = self.sequence(0);
        (1..self.n()).all(|v| self.sequence(v) == first)
    }

    /// One line per node, alternatives top to bottom.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n() {
            out.push_str(&self.order(v).to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Profile> {
        let orders = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.parse::<Order>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::from_orders(&orders)
    }
}

/// Number of unordered alternative pairs, `C(α, 2)`.
pub fn pair_count(alpha: usize) -> usize {
    alpha * (alpha - 1) / 2
}

/// The `k`-th unordered pair `(a, b)`, `a < b`, in lexicographic order.
#[inline]
pub fn unrank_pair(alpha: usize, mut k: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = alpha - 1 - a;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
        a += 1;
    }
}

fn check_pair(profile: &Profile, a: usize, b: usize) -> Result<()> {
    if a == b || a >= profile.alpha() || b >= profile.alpha() {
        return Err(Error::domain(format!(
            "need two distinct alternatives below {}, got ({a}, {b})",
            profile.alpha()
        )));
    }
    Ok(())
}

/// `n_ab`: nodes ranking `a` above `b`.
pub fn n_ab(profile: &Profile, a: usize, b: usize) -> Result<usize> {
    check_pair(profile, a, b)?;
    Ok((0..profile.n()).filter(|&v| profile.prefers(v, a, b)).count())
}

/// Number of alternative pairs on which `v` and `u` disagree.
pub fn edge_potential(profile: &Profile, v: usize, u: usize) -> usize {
    let alpha = profile.alpha();
    let mut count = 0;
    for a in 0..alpha {
        for b in a + 1..alpha {
            if profile.prefers(v, a, b) != profile.prefers(u, a, b) {
                count += 1;
            }
        }
    }
    count
}

/// Total disagreement over all edges.
pub fn graph_potential(graph: &Graph, profile: &Profile) -> u64 {
    graph
        .edges()
        .map(|(u, v)| edge_potential(profile, u, v) as u64)
        .sum()
}

/// A non-negative rational margin `num / den`, compared exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Epsilon> {
        if den == 0 {
            return Err(Error::domain("epsilon denominator is zero"));
        }
        Ok(Epsilon { num, den })
    }

    pub fn zero() -> Epsilon {
        Epsilon { num: 0, den: 1 }
    }

    /// Whether `wins - losses > ε n`.
    fn margin_exceeds(&self, wins: usize, losses: usize, n: usize) -> bool {
        let lhs = (wins as i128 - losses as i128) * self.den as i128;
        lhs > self.num as i128 * n as i128
    }
}

/// Whether alternative `a` beats every rival by more than `ε n` nodes.
pub fn is_epsilon_condorcet_alt(profile: &Profile, a: usize, eps: Epsilon) -> Result<bool> {
    if a >= profile.alpha() {
        return Err(Error::domain(format!("alternative {a} out of range")));
    }
    let n = profile.n();
    for b in (0..profile.alpha()).filter(|&b| b != a) {
        let wins = n_ab(profile, a, b)?;
        if !eps.margin_exceeds(wins, n - wins, n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every pair ordered by `order` wins by more than `ε n` nodes.
pub fn is_epsilon_condorcet_order(profile: &Profile, order: &Order, eps: Epsilon) -> Result<bool> {
    if order.alpha() != profile.alpha() {
        return Err(Error::domain("order and profile disagree on the alternative count"));
    }
    let n = profile.n();
    for (a, b) in order.preferred_pairs() {
        let wins = n_ab(profile, a, b)?;
        if !eps.margin_exceeds(wins, n - wins, n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `B_ab`: nodes where at least half of the neighbours rank `b` above `a`.
pub fn bad_set(graph: &Graph, profile: &Profile, a: usize, b: usize) -> Result<NodeSet> {
    check_pair(profile, a, b)?;
    let mut set = NodeSet::new(graph.n());
    for v in 0..graph.n() {
        let against = graph
            .neighbors(v)
            .iter()
            .filter(|&&u| profile.prefers(u as usize, b, a))
            .count();
        if 2 * against >= graph.degree(v) {
            set.insert(v);
        }
    }
    Ok(set)
}

/// `B_≻`: union of `B_ab` over all pairs with `a ≻ b`.
pub fn bad_set_order(graph: &Graph, profile: &Profile, order: &Order) -> Result<NodeSet> {
    let mut set = NodeSet::new(graph.n());
    for (a, b) in order.preferred_pairs() {
        set.union_with(&bad_set(graph, profile, a, b)?);
    }
    Ok(set)
}

/// `Z_ab`: degree sum of the nodes ranking `a` above `b`.
pub fn z_ab(graph: &Graph, profile: &Profile, a: usize, b: usize) -> Result<usize> {
    check_pair(profile, a, b)?;
    Ok((0..graph.n())
        .filter(|&v| profile.prefers(v, a, b))
        .map(|v| graph.degree(v))
        .sum())
}

/// `Z_≻`: degree sum of the nodes holding exactly `order`.
pub fn z_order(graph: &Graph, profile: &Profile, order: &Order) -> usize {
    (0..graph.n())
        .filter(|&v| profile.holds(v, order))
        .map(|v| graph.degree(v))
        .sum()
}

/// Optional bias towards one order in [`random_profile`].
#[derive(Clone, Debug)]
pub struct Bias {
    pub order: Order,
    /// Probability that a node is forced to `order`; otherwise it draws a
    /// uniform permutation (which may also be `order`).
    pub weight: f64,
}

/// Each node independently takes the bias order with probability
/// `bias.weight` and a uniformly shuffled order otherwise.
pub fn random_profile(n: usize, alpha: usize, seed: u64, bias: Option<&Bias>) -> Result<Profile> {
    let mut rng = rng::from_seed(seed);
    random_profile_with(n, alpha, &mut rng, bias)
}

pub fn random_profile_with<R: Rng + ?Sized>(
    n: usize,
    alpha: usize,
    rng: &mut R,
    bias: Option<&Bias>,
) -> Result<Profile> {
    if n == 0 {
        return Err(Error::domain("profile needs at least one node"));
    }
    let base = Order::identity(alpha)?;
    if let Some(bias) = bias {
        if !(0.0..1.0).contains(&bias.weight) {
            return Err(Error::domain(format!("bias weight {} outside [0, 1)", bias.weight)));
        }
        if bias.order.alpha() != alpha {
            return Err(Error::domain("bias order has the wrong alternative count"));
        }
    }
    let mut profile = Profile::uniform(n, &base);
    let mut seq: Vec<usize> = (0..alpha).collect();
    for v in 0..n {
        match bias {
            Some(b) if rng.random_bool(b.weight) => profile.set_order(v, &b.order),
            _ => {
                seq.shuffle(rng);
                profile.set_order(v, &Order::from_sequence(&seq)?);
            }
        }
    }
    Ok(profile)
}
