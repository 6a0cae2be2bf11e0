//! Diffusion engines and run loops.
//!
//! * SPD: every node draws a uniform pair of alternatives each round and
//!   swaps it when the pair is adjacent in its order and a strict majority of
//!   its neighbours disagrees. All nodes read the round-start profile.
//! * APD: one uniformly chosen node per round applies the same rule.
//! * Random PD: each node, with probability `q`, copies the whole order of a
//!   uniform neighbour (again from the round-start profile).
//! * Similarity SPD: SPD where neighbour votes are weighted by
//!   neighbourhood similarity and the disagreeing weight must strictly
//!   exceed the agreeing weight.

mod rounds;
mod run;
mod tracker;
mod walks;

pub use rounds::{
    apd_round, draw_pair, draw_pairs, draw_random_pd_choices, is_fixed, is_fixed_weighted,
    random_pd_apply, random_pd_round, similarity_spd_round, spd_apply, spd_round,
    spd_apply_weighted,
};
pub use run::{run_apd_observed, run_random_pd, run_rounds, run_to_fixed, run_to_fixed_weighted, SwapEvent};
pub use tracker::MajorityTracker;
pub use walks::{coin_flip_trial, token_walk_meeting_time, MeetingTime};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::preference::{Order, Profile};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    Spd,
    Apd,
    /// `q` is the per-node, per-round copy probability, `0 < q < 1`.
    RandomPd { q: f64 },
    SimilaritySpd,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Spd => "spd",
            Engine::Apd => "apd",
            Engine::RandomPd { .. } => "randompd",
            Engine::SimilaritySpd => "simspd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub engine: Engine,
    /// Safety cap on rounds; `None` picks [`default_max_rounds`].
    pub max_rounds: Option<u64>,
    pub seed: u64,
    /// Record the graph potential after every round.
    pub record_potential: bool,
}

impl RunConfig {
    pub fn new(engine: Engine, seed: u64) -> RunConfig {
        RunConfig {
            engine,
            max_rounds: None,
            seed,
            record_potential: false,
        }
    }

    pub fn with_max_rounds(mut self, rounds: u64) -> RunConfig {
        self.max_rounds = Some(rounds);
        self
    }

    pub fn with_potential(mut self) -> RunConfig {
        self.record_potential = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Engine::RandomPd { q } = self.engine {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::domain(format!("copy probability {q} outside (0, 1)")));
            }
        }
        if self.max_rounds == Some(0) {
            return Err(Error::domain("max_rounds must be at least 1"));
        }
        Ok(())
    }

    pub fn cap_for(&self, graph: &Graph, alpha: usize) -> u64 {
        self.max_rounds
            .unwrap_or_else(|| default_max_rounds(self.engine, graph, alpha))
    }
}

/// `2 n m α⁴` for the majority engines, `64 n²` for Random PD.
pub fn default_max_rounds(engine: Engine, graph: &Graph, alpha: usize) -> u64 {
    let n = graph.n() as u64;
    let m = graph.m() as u64;
    match engine {
        Engine::RandomPd { .. } => 64u64.saturating_mul(n).saturating_mul(n).max(1),
        _ => 2u64
            .saturating_mul(n)
            .saturating_mul(m.max(1))
            .saturating_mul((alpha as u64).pow(4))
            .max(1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    /// No effective update is possible any more.
    Fixed,
    /// All nodes hold the same order.
    Consensus,
    CapHit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub rounds_elapsed: u64,
    pub terminated: Termination,
    pub final_profile: Profile,
    /// The common order when the final profile is unanimous.
    pub winning_order: Option<Order>,
    pub potential_trace: Option<Vec<u64>>,
}

pub(crate) fn check_sizes(graph: &Graph, profile: &Profile) -> Result<()> {
    if graph.n() != profile.n() {
        return Err(Error::domain(format!(
            "profile has {} nodes but the graph has {}",
            profile.n(),
            graph.n()
        )));
    }
    Ok(())
}

pub(crate) fn unanimous_order(profile: &Profile) -> Option<Order> {
    profile.is_consensus().then(|| profile.order(0))
}
