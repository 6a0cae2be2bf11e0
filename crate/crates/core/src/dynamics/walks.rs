//! Coalescing token walk and the coin-flip process.

use rand::distr::Bernoulli;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeetingTime {
    pub rounds: u64,
    /// False when the cap was reached first.
    pub met: bool,
}

/// Every node starts with a token. Each round, the tokens on an occupied
/// node stay with probability `1 - q` and otherwise all move together to a
/// uniform neighbour. Returns the number of rounds until a single node holds
/// every token.
pub fn token_walk_meeting_time(graph: &Graph, q: f64, seed: u64, max_rounds: u64) -> Result<MeetingTime> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("move probability {q} outside (0, 1)")));
    }
    if graph.n() == 0 {
        return Err(Error::domain("token walk on an empty graph"));
    }
    if !graph.is_connected() {
        return Err(Error::domain("token walk needs a connected graph"));
    }
    let coin = Bernoulli::new(q).expect("checked above");
    let mut rng = rng::from_seed(seed);
    let mut occupied: Vec<usize> = (0..graph.n()).collect();
    let mut mark = vec![false; graph.n()];
    let mut next = Vec::with_capacity(graph.n());
    let mut rounds = 0;
    while occupied.len() > 1 && rounds < max_rounds {
        rounds += 1;
        next.clear();
        for &v in &occupied {
            let to = if rng.sample(coin) {
                let nb = graph.neighbors(v);
                nb[rng.random_range(0..nb.len())] as usize
            } else {
                v
            };
            if !mark[to] {
                mark[to] = true;
                next.push(to);
            }
        }
        next.sort_unstable();
        for &v in &next {
            mark[v] = false;
        }
        std::mem::swap(&mut occupied, &mut next);
    }
    Ok(MeetingTime {
        rounds,
        met: occupied.len() == 1,
    })
}

/// Flips a `p`-coin until the `k`-th head and returns the number of flips.
pub fn coin_flip_trial<R: Rng + ?Sized>(p: f64, k: u64, rng: &mut R) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("head probability {p} outside (0, 1]")));
    }
    if k == 0 {
        return Err(Error::domain("need at least one head"));
    }
    let coin = Bernoulli::new(p).expect("checked above");
    let (mut flips, mut heads) = (0, 0);
    while heads < k {
        flips += 1;
        if rng.sample(coin) {
            heads += 1;
        }
    }
    Ok(flips)
}
