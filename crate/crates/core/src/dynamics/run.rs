//! Run loops: iterate rounds until fixation, consensus, or the cap.

use rand::distr::Bernoulli;
use rand::Rng;

use super::rounds::{draw_pair, is_fixed, is_fixed_weighted, random_pd_round, similarity_spd_round, spd_round};
use super::tracker::MajorityTracker;
use super::{check_sizes, unanimous_order, Engine, RunConfig, Termination, TrialResult};
use crate::error::{Error, Result};
use crate::graph::{Graph, SimilarityTable};
use crate::preference::{graph_potential, Profile};
use crate::rng::{self, SimRng};

/// One effective APD update, reported to [`run_apd_observed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapEvent {
    /// 1-based round in which the swap happened.
    pub round: u64,
    pub node: usize,
    pub a: usize,
    pub b: usize,
    pub potential_before: u64,
    pub potential_after: u64,
}

fn finish(rounds: u64, fixed: bool, profile: Profile, trace: Option<Vec<u64>>) -> TrialResult {
    let winning_order = unanimous_order(&profile);
    let terminated = match (fixed, winning_order.is_some()) {
        (_, true) => Termination::Consensus,
        (true, false) => Termination::Fixed,
        (false, false) => Termination::CapHit,
    };
    TrialResult {
        rounds_elapsed: rounds,
        terminated,
        final_profile: profile,
        winning_order,
        potential_trace: trace,
    }
}

/// Runs SPD, APD or similarity SPD until the profile is fixed or the cap is
/// reached. A unanimous fixed profile is reported as
/// [`Termination::Consensus`]. APD rounds are single node activations.
///
/// Similarity SPD builds its similarity table on every call; use
/// [`run_to_fixed_weighted`] to share one across trials.
pub fn run_to_fixed(graph: &Graph, initial: &Profile, config: &RunConfig) -> Result<TrialResult> {
    match config.engine {
        Engine::Apd => run_apd_observed(graph, initial, config, |_| {}),
        Engine::Spd => run_spd(graph, initial, config),
        Engine::SimilaritySpd => {
            let table = SimilarityTable::new(graph);
            run_to_fixed_weighted(graph, initial, &table, config)
        }
        Engine::RandomPd { .. } => Err(Error::domain("run_to_fixed does not drive Random PD; use run_random_pd")),
    }
}

fn run_spd(graph: &Graph, initial: &Profile, config: &RunConfig) -> Result<TrialResult> {
    config.validate()?;
    check_sizes(graph, initial)?;
    let cap = config.cap_for(graph, initial.alpha());
    let mut rng = rng::from_seed(config.seed);
    let mut trace = config.record_potential.then(Vec::new);
    let mut profile = initial.clone();
    let mut rounds = 0;
    let mut fixed = is_fixed(graph, &profile);
    while !fixed && rounds < cap {
        let (next, swaps) = spd_round(graph, &profile, &mut rng);
        profile = next;
        rounds += 1;
        if let Some(t) = trace.as_mut() {
            t.push(graph_potential(graph, &profile));
        }
        // An idle round leaves the (unfixed) profile unchanged.
        if swaps > 0 {
            fixed = is_fixed(graph, &profile);
        }
    }
    Ok(finish(rounds, fixed, profile, trace))
}

/// Similarity SPD with a caller-supplied table.
pub fn run_to_fixed_weighted(
    graph: &Graph,
    initial: &Profile,
    table: &SimilarityTable,
    config: &RunConfig,
) -> Result<TrialResult> {
    config.validate()?;
    check_sizes(graph, initial)?;
    let cap = config.cap_for(graph, initial.alpha());
    let mut rng = rng::from_seed(config.seed);
    let mut trace = config.record_potential.then(Vec::new);
    let mut profile = initial.clone();
    let mut rounds = 0;
    let mut fixed = is_fixed_weighted(graph, &profile, table);
    while !fixed && rounds < cap {
        let (next, swaps) = similarity_spd_round(graph, &profile, table, &mut rng);
        profile = next;
        rounds += 1;
        if let Some(t) = trace.as_mut() {
            t.push(graph_potential(graph, &profile));
        }
        if swaps > 0 {
            fixed = is_fixed_weighted(graph, &profile, table);
        }
    }
    Ok(finish(rounds, fixed, profile, trace))
}

/// APD to fixation, calling `observe` after every effective update. Draws
/// are consumed exactly as by repeated [`super::apd_round`] calls.
pub fn run_apd_observed<F>(graph: &Graph, initial: &Profile, config: &RunConfig, mut observe: F) -> Result<TrialResult>
where
    F: FnMut(&SwapEvent),
{
    config.validate()?;
    check_sizes(graph, initial)?;
    let cap = config.cap_for(graph, initial.alpha());
    let mut rng = rng::from_seed(config.seed);
    let mut trace = config.record_potential.then(Vec::new);
    let mut profile = initial.clone();
    let mut tracker = MajorityTracker::new(graph, &profile);
    let alpha = profile.alpha();
    let mut rounds = 0;
    while !tracker.is_fixed() && rounds < cap {
        rounds += 1;
        let v = rng.random_range(0..graph.n());
        let (a, b) = draw_pair(alpha, &mut rng);
        if tracker.would_swap(&profile, v, a, b) {
            let before = tracker.potential();
            tracker.apply_swap(graph, &mut profile, v, a, b);
            observe(&SwapEvent {
                round: rounds,
                node: v,
                a,
                b,
                potential_before: before,
                potential_after: tracker.potential(),
            });
        }
        if let Some(t) = trace.as_mut() {
            t.push(tracker.potential());
        }
    }
    Ok(finish(rounds, tracker.is_fixed(), profile, trace))
}

/// Runs exactly `rounds` rounds of any engine (no early stop) and calls
/// `observe(round, profile)` for round 0 and after every round.
pub fn run_rounds<F>(graph: &Graph, initial: &Profile, config: &RunConfig, rounds: u64, mut observe: F) -> Result<Profile>
where
    F: FnMut(u64, &Profile),
{
    config.validate()?;
    check_sizes(graph, initial)?;
    let mut rng = rng::from_seed(config.seed);
    let table = matches!(config.engine, Engine::SimilaritySpd).then(|| SimilarityTable::new(graph));
    let mut profile = initial.clone();
    observe(0, &profile);
    for round in 1..=rounds {
        profile = step(graph, profile, config.engine, table.as_ref(), &mut rng);
        observe(round, &profile);
    }
    Ok(profile)
}

fn step(graph: &Graph, mut profile: Profile, engine: Engine, table: Option<&SimilarityTable>, rng: &mut SimRng) -> Profile {
    match engine {
        Engine::Spd => spd_round(graph, &profile, rng).0,
        Engine::Apd => {
            super::apd_round(graph, &mut profile, rng);
            profile
        }
        Engine::RandomPd { q } => random_pd_round(graph, &profile, q, rng),
        Engine::SimilaritySpd => similarity_spd_round(graph, &profile, table.expect("table built"), rng).0,
    }
}

/// Random PD until all nodes hold the same order or the cap is hit.
///
/// Orders are interned to integer ids so a round costs `O(n)` regardless of
/// `α`; the random draws match [`super::random_pd_round`] one for one.
pub fn run_random_pd(graph: &Graph, initial: &Profile, config: &RunConfig) -> Result<TrialResult> {
    config.validate()?;
    check_sizes(graph, initial)?;
    let Engine::RandomPd { q } = config.engine else {
        return Err(Error::domain("run_random_pd needs the Random PD engine"));
    };
    let n = graph.n();
    let cap = config.cap_for(graph, initial.alpha());
    let mut rng = rng::from_seed(config.seed);

    // Intern: id of a node's order = smallest node holding the same order.
    let mut ids: Vec<u32> = Vec::with_capacity(n);
    let mut seen: std::collections::HashMap<&[u8], u32> = std::collections::HashMap::new();
    for v in 0..n {
        let id = *seen.entry(initial.sequence(v)).or_insert(v as u32);
        ids.push(id);
    }
    drop(seen);
    let mut counts = vec![0usize; n];
    for &id in &ids {
        counts[id as usize] += 1;
    }
    let mut trace = config.record_potential.then(Vec::new);
    let coin = Bernoulli::new(q).expect("validated");
    let mut next = ids.clone();
    let mut rounds = 0;
    let mut consensus = counts[ids[0] as usize] == n;
    while !consensus && rounds < cap {
        rounds += 1;
        next.copy_from_slice(&ids);
        for (v, slot) in next.iter_mut().enumerate() {
            let copy = rng.sample(coin);
            if !copy {
                continue;
            }
            let nb = graph.neighbors(v);
            if nb.is_empty() {
                continue;
            }
            let u = nb[rng.random_range(0..nb.len())] as usize;
            let new = ids[u];
            if new != *slot {
                counts[*slot as usize] -= 1;
                counts[new as usize] += 1;
                *slot = new;
            }
        }
        std::mem::swap(&mut ids, &mut next);
        if let Some(t) = trace.as_mut() {
            t.push(interned_potential(graph, &ids, initial));
        }
        consensus = counts[ids[0] as usize] == n;
    }
    let mut profile = initial.clone();
    for (v, &id) in ids.iter().enumerate() {
        profile.copy_from(v, initial, id as usize);
    }
    Ok(finish(rounds, false, profile, trace))
}

fn interned_potential(graph: &Graph, ids: &[u32], initial: &Profile) -> u64 {
    let mut profile = initial.clone();
    for (v, &id) in ids.iter().enumerate() {
        profile.copy_from(v, initial, id as usize);
    }
    graph_potential(graph, &profile)
}
