//! Placements of a seeded alternative, their cost, and exact counts of
//! winning placements on structured graphs.
//!
//! A placement puts alternative `a` at a position `1..=α` on every node
//! (position 1 is the top). It is a solution when `a` ends up on top of
//! every node regardless of how the other alternatives are arranged and of
//! the random choices of the dynamics.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dynamics::{run_to_fixed, Engine, RunConfig, TrialResult};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::preference::{Order, Profile, MAX_ALTERNATIVES};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    alpha: usize,
    positions: Vec<usize>,
}

impl Placement {
    pub fn new(alpha: usize, positions: Vec<usize>) -> Result<Placement> {
        if !(2..=MAX_ALTERNATIVES).contains(&alpha) {
            return Err(Error::domain(format!("alpha must be in 2..={MAX_ALTERNATIVES}, got {alpha}")));
        }
        if let Some((v, &p)) = positions.iter().enumerate().find(|(_, &p)| p == 0 || p > alpha) {
            return Err(Error::domain(format!("node {v}: position {p} outside 1..={alpha}")));
        }
        Ok(Placement { alpha, positions })
    }

    /// Every node puts the seeded alternative at `position`.
    pub fn uniform(n: usize, alpha: usize, position: usize) -> Result<Placement> {
        Placement::new(alpha, vec![position; n])
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> usize {
        self.positions[v]
    }

    /// One integer position per line; blank lines and `#` comments skipped.
    pub fn from_text(text: &str, alpha: usize) -> Result<Placement> {
        let mut positions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p = line.parse::<usize>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{line:?}: {e}"),
            })?;
            positions.push(p);
        }
        if positions.is_empty() {
            return Err(Error::EmptyInput("placement file has no positions".to_string()));
        }
        Placement::new(alpha, positions)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.positions.len() * 2);
        for p in &self.positions {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}] (alpha={})", parts.join(","), self.alpha)
    }
}

/// `Σ_v (α - position_v)`.
pub fn placement_cost(placement: &Placement) -> u64 {
    placement
        .positions
        .iter()
        .map(|&p| (placement.alpha - p) as u64)
        .sum()
}

/// On a cycle indexed `0..n`: every cyclic window of three consecutive
/// nodes holds at least two first positions.
pub fn cycle_is_solution(placement: &Placement) -> Result<bool> {
    let n = placement.n();
    if n < 3 {
        return Err(Error::domain(format!("cycle needs n >= 3, got {n}")));
    }
    let p = &placement.positions;
    Ok((0..n).all(|i| {
        let firsts = (0..3).filter(|&j| p[(i + j) % n] == 1).count();
        firsts >= 2
    }))
}

fn check_cycle(n: usize, alpha: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::domain(format!("cycle needs n >= 3, got {n}")));
    }
    if alpha < 2 {
        return Err(Error::domain(format!("need alpha >= 2, got {alpha}")));
    }
    Ok(())
}

/// Minimum solution cost on `C_n`: `(2⌊n/3⌋ + (n mod 3))(α - 1)`.
pub fn mc_cycle(n: usize, alpha: usize) -> Result<u64> {
    check_cycle(n, alpha)?;
    Ok(((2 * (n / 3) + n % 3) * (alpha - 1)) as u64)
}

/// Number of solutions on the path `P_n`, via
/// `p(n) = p(n-1) + (α-1) p(n-3)` from `p(3), p(4), p(5)`.
pub fn ns_path(n: usize, alpha: usize) -> Result<BigUint> {
    check_cycle(n, alpha)?;
    let a = BigUint::from(alpha);
    let w = BigUint::from(alpha - 1);
    let mut p = vec![
        BigUint::from(3 * alpha - 2),
        &a * &a + BigUint::from(2 * alpha) - 2u32,
        BigUint::from(3u32) * &a * &a - &a - 1u32,
    ];
    while p.len() < n - 2 {
        let k = p.len();
        let next = &p[k - 1] + &w * &p[k - 3];
        p.push(next);
    }
    Ok(p.swap_remove(n - 3))
}

/// Exact number of solutions on `C_n`.
///
/// Scans the cycle with state `(s_{i-1}, s_i)` over symbols `F` (first
/// position) and `O` (any of the `α - 1` other positions). A window of three
/// may contain at most one `O`, so the state `OO` never occurs and the
/// transfer matrix acts on `{FF, FO, OF}`. The cycle is closed by fixing the
/// seam `(s_0, s_1)` and checking the two windows that wrap around.
pub fn ns_cycle(n: usize, alpha: usize) -> Result<BigUint> {
    check_cycle(n, alpha)?;
    let w = BigUint::from(alpha - 1);
    let mut total = BigUint::zero();
    let seams = [(false, false), (false, true), (true, false)];
    for &(s0, s1) in &seams {
        // counts[(x, y)] for the last two symbols; true = O.
        let mut counts = [[BigUint::zero(), BigUint::zero()], [BigUint::zero(), BigUint::zero()]];
        let mut start = BigUint::one();
        for s in [s0, s1] {
            if s {
                start *= &w;
            }
        }
        counts[s0 as usize][s1 as usize] = start;
        for _ in 2..n {
            let mut next = [[BigUint::zero(), BigUint::zero()], [BigUint::zero(), BigUint::zero()]];
            for x in [false, true] {
                for y in [false, true] {
                    let c = &counts[x as usize][y as usize];
                    if c.is_zero() {
                        continue;
                    }
                    for z in [false, true] {
                        if (x as u8 + y as u8 + z as u8) > 1 {
                            continue;
                        }
                        let add = if z { c * &w } else { c.clone() };
                        next[y as usize][z as usize] += add;
                    }
                }
            }
            counts = next;
        }
        for x in [false, true] {
            for y in [false, true] {
                // windows (x, y, s0) and (y, s0, s1)
                let ok = (x as u8 + y as u8 + s0 as u8) <= 1 && (y as u8 + s0 as u8 + s1 as u8) <= 1;
                if ok {
                    total += &counts[x as usize][y as usize];
                }
            }
        }
    }
    Ok(total)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn check_alpha(alpha: usize) -> Result<()> {
    if alpha < 2 {
        return Err(Error::domain(format!("need alpha >= 2, got {alpha}")));
    }
    Ok(())
}

/// `Σ_{k=⌊n/2⌋+1}^{n} C(n,k) (α-1)^{n-k}`: a strict majority takes the top.
pub fn ns_complete(n: usize, alpha: usize) -> Result<BigUint> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::domain("complete graph needs n >= 1"));
    }
    let w = BigUint::from(alpha - 1);
    Ok((n / 2 + 1..=n)
        .map(|k| binomial(n, k) * w.pow((n - k) as u32))
        .sum())
}

/// `Σ_{k=⌈(n-1)/2⌉}^{n-1} C(n-1,k) (α-1)^{n-1-k}`: the centre on top and
/// at least half of the leaves on top.
pub fn ns_star(n: usize, alpha: usize) -> Result<BigUint> {
    check_alpha(alpha)?;
    if n < 2 {
        return Err(Error::domain("star needs n >= 2"));
    }
    let leaves = n - 1;
    let w = BigUint::from(alpha - 1);
    Ok((leaves.div_ceil(2)..=leaves)
        .map(|k| binomial(leaves, k) * w.pow((leaves - k) as u32))
        .sum())
}

/// Only the all-first placement wins on an edgeless graph.
pub fn ns_empty(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::domain("empty graph needs n >= 1"));
    }
    Ok(BigUint::one())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiRoot {
    pub value: f64,
    /// Whether `value` lies in `(α^{1/3}, α^{1/3} + 0.22)`. This holds for
    /// `α = 2` only; for larger `α` the root sits near `α^{1/3} + 1/3`.
    pub within_reported_interval: bool,
}

/// The real root of `x³ - x² - (α - 1) = 0`, the growth rate of
/// [`ns_path`] and [`ns_cycle`].
pub fn psi_root(alpha: usize) -> Result<PsiRoot> {
    check_alpha(alpha)?;
    let c = (alpha - 1) as f64;
    let f = |x: f64| x * x * x - x * x - c;
    let cube = (alpha as f64).cbrt();
    // f(α^{1/3}) = 1 - α^{2/3} < 0 and f(α^{1/3} + 1) > 0.
    let (mut lo, mut hi) = (cube, cube + 1.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    Ok(PsiRoot {
        value,
        within_reported_interval: value > cube && value < cube + 0.22,
    })
}

/// First position on the clique of [`crate::graph::gen_clique_with_leaves`],
/// last position on every leaf. Cost `k(α - 1)`.
pub fn clique_leaves_solution(k: usize, alpha: usize) -> Result<Placement> {
    if k < 2 {
        return Err(Error::domain(format!("clique-with-leaves needs k >= 2, got {k}")));
    }
    let mut positions = vec![alpha; k * k];
    positions[..k].fill(1);
    Placement::new(alpha, positions)
}

/// Seeded alternative `a = 0` and rival `b = 1`. Where `a` is first, `b` is
/// second; elsewhere `b` is first. The other alternatives fill the remaining
/// positions in ascending order.
pub fn adversarial_profile(placement: &Placement) -> Result<Profile> {
    let alpha = placement.alpha;
    let orders = placement
        .positions
        .iter()
        .map(|&pos| {
            let mut seq = vec![usize::MAX; alpha];
            seq[pos - 1] = 0;
            let b_slot = if pos == 1 { 1 } else { 0 };
            seq[b_slot] = 1;
            let mut rest = 2..alpha;
            for slot in seq.iter_mut().filter(|s| **s == usize::MAX) {
                *slot = rest.next().expect("exactly α - 2 free slots");
            }
            Order::from_sequence(&seq)
        })
        .collect::<Result<Vec<_>>>()?;
    Profile::from_orders(&orders)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Falsification {
    /// An APD run reached a fixed profile in which some node does not rank
    /// the seeded alternative first.
    Counterexample { trial: u64, result: Box<TrialResult> },
    NotFalsified,
}

/// Runs `trials` APD runs from [`adversarial_profile`], trial `t` seeded by
/// `derive_seed(seed, t)`, and returns the first one whose final fixed
/// profile lacks `a` on top somewhere. Runs that hit the round cap do not
/// count as counterexamples. A miss proves nothing.
pub fn falsify_solution(graph: &Graph, placement: &Placement, trials: u64, seed: u64) -> Result<Falsification> {
    if placement.n() != graph.n() {
        return Err(Error::domain(format!(
            "placement has {} nodes but the graph has {}",
            placement.n(),
            graph.n()
        )));
    }
    let initial = adversarial_profile(placement)?;
    for trial in 0..trials {
        let config = RunConfig::new(Engine::Apd, rng::derive_seed(seed, trial));
        let result = run_to_fixed(graph, &initial, &config)?;
        let settled = result.terminated != crate::dynamics::Termination::CapHit;
        let a_everywhere = (0..graph.n()).all(|v| result.final_profile.at(v, 0) == 0);
        if settled && !a_everywhere {
            return Ok(Falsification::Counterexample {
                trial,
                result: Box::new(result),
            });
        }
    }
    Ok(Falsification::NotFalsified)
}
