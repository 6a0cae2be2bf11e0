//! Single-round transition kernels.

use rand::distr::Bernoulli;
use rand::Rng;

use crate::graph::{Graph, SimilarityTable};
use crate::preference::{pair_count, unrank_pair, Profile};

/// Uniform unordered pair of distinct alternatives.
#[inline]
pub fn draw_pair<R: Rng + ?Sized>(alpha: usize, rng: &mut R) -> (usize, usize) {
    unrank_pair(alpha, rng.random_range(0..pair_count(alpha)))
}

/// One pair per node, in node id order.
pub fn draw_pairs<R: Rng + ?Sized>(n: usize, alpha: usize, rng: &mut R) -> Vec<(usize, usize)> {
    (0..n).map(|_| draw_pair(alpha, rng)).collect()
}

/// Neighbours of `v` whose relative order of `a`, `b` differs from `v`'s.
#[inline]
pub(crate) fn disagreeing(graph: &Graph, profile: &Profile, v: usize, a: usize, b: usize) -> usize {
    let mine = profile.prefers(v, a, b);
    graph
        .neighbors(v)
        .iter()
        .filter(|&&u| profile.prefers(u as usize, a, b) != mine)
        .count()
}

/// The majority rule: swap iff adjacent and `2 · disagreeing > degree`.
#[inline]
pub(crate) fn majority_swaps(graph: &Graph, profile: &Profile, v: usize, a: usize, b: usize) -> bool {
    profile.adjacent(v, a, b) && 2 * disagreeing(graph, profile, v, a, b) > graph.degree(v)
}

/// The similarity-weighted rule: swap iff adjacent and the disagreeing
/// weight strictly exceeds the agreeing weight.
#[inline]
pub(crate) fn weighted_swaps(
    graph: &Graph,
    table: &SimilarityTable,
    profile: &Profile,
    v: usize,
    a: usize,
    b: usize,
) -> bool {
    if !profile.adjacent(v, a, b) {
        return false;
    }
    let mine = profile.prefers(v, a, b);
    let (mut against, mut with) = (0.0, 0.0);
    for (&u, &w) in graph.neighbors(v).iter().zip(table.weights(v)) {
        if profile.prefers(u as usize, a, b) != mine {
            against += w;
        } else {
            with += w;
        }
    }
    against > with
}

/// One SPD round. Returns the new profile and the number of swaps.
pub fn spd_round<R: Rng + ?Sized>(graph: &Graph, profile: &Profile, rng: &mut R) -> (Profile, usize) {
    let pairs = draw_pairs(graph.n(), profile.alpha(), rng);
    spd_apply(graph, profile, &pairs, 0..graph.n())
}

/// Applies pre-drawn SPD pairs, visiting nodes in `visit` order. Every
/// decision reads `input`, so the visiting order cannot change the result.
pub fn spd_apply<I>(graph: &Graph, input: &Profile, pairs: &[(usize, usize)], visit: I) -> (Profile, usize)
where
    I: IntoIterator<Item = usize>,
{
    let mut out = input.clone();
    let mut swaps = 0;
    for v in visit {
        let (a, b) = pairs[v];
        if majority_swaps(graph, input, v, a, b) {
            out.swap_adjacent(v, a, b);
            swaps += 1;
        }
    }
    (out, swaps)
}

/// One similarity-weighted SPD round.
pub fn similarity_spd_round<R: Rng + ?Sized>(
    graph: &Graph,
    profile: &Profile,
    table: &SimilarityTable,
    rng: &mut R,
) -> (Profile, usize) {
    let pairs = draw_pairs(graph.n(), profile.alpha(), rng);
    spd_apply_weighted(graph, profile, table, &pairs)
}

pub fn spd_apply_weighted(
    graph: &Graph,
    input: &Profile,
    table: &SimilarityTable,
    pairs: &[(usize, usize)],
) -> (Profile, usize) {
    let mut out = input.clone();
    let mut swaps = 0;
    for (v, &(a, b)) in pairs.iter().enumerate() {
        if weighted_swaps(graph, table, input, v, a, b) {
            out.swap_adjacent(v, a, b);
            swaps += 1;
        }
    }
    (out, swaps)
}

/// One APD round, in place: a uniform node draws a uniform pair.
/// Returns whether a swap happened.
pub fn apd_round<R: Rng + ?Sized>(graph: &Graph, profile: &mut Profile, rng: &mut R) -> bool {
    let v = rng.random_range(0..graph.n());
    let (a, b) = draw_pair(profile.alpha(), rng);
    if majority_swaps(graph, profile, v, a, b) {
        profile.swap_adjacent(v, a, b);
        true
    } else {
        false
    }
}

/// Per-node Random PD decisions: `Some(u)` copies neighbour `u`, `None`
/// keeps the current order. Isolated nodes always keep.
pub fn draw_random_pd_choices<R: Rng + ?Sized>(graph: &Graph, q: f64, rng: &mut R) -> Vec<Option<u32>> {
    let coin = Bernoulli::new(q).expect("q validated by the caller");
    (0..graph.n())
        .map(|v| {
            let copy = rng.sample(coin);
            let nb = graph.neighbors(v);
            (copy && !nb.is_empty()).then(|| nb[rng.random_range(0..nb.len())])
        })
        .collect()
}

pub fn random_pd_apply(input: &Profile, choices: &[Option<u32>]) -> Profile {
    let mut out = input.clone();
    for (v, choice) in choices.iter().enumerate() {
        if let Some(u) = choice {
            out.copy_from(v, input, *u as usize);
        }
    }
    out
}

/// One synchronous Random PD round.
pub fn random_pd_round<R: Rng + ?Sized>(graph: &Graph, profile: &Profile, q: f64, rng: &mut R) -> Profile {
    let choices = draw_random_pd_choices(graph, q, rng);
    random_pd_apply(profile, &choices)
}

/// No node has an adjacent pair on which a strict majority of its
/// neighbours disagrees.
pub fn is_fixed(graph: &Graph, profile: &Profile) -> bool {
    (0..graph.n()).all(|v| {
        (0..profile.alpha() - 1).all(|pos| {
            let (a, b) = (profile.at(v, pos), profile.at(v, pos + 1));
            2 * disagreeing(graph, profile, v, a, b) <= graph.degree(v)
        })
    })
}

/// [`is_fixed`] under the similarity-weighted rule.
pub fn is_fixed_weighted(graph: &Graph, profile: &Profile, table: &SimilarityTable) -> bool {
    (0..graph.n()).all(|v| {
        (0..profile.alpha() - 1).all(|pos| {
            let (a, b) = (profile.at(v, pos), profile.at(v, pos + 1));
            !weighted_swaps(graph, table, profile, v, a, b)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_cycle, gen_path, gen_star, Graph};
    use crate::preference::{random_profile, Order};
    use crate::rng;

    fn ord(s: &str) -> Order {
        s.parse().unwrap()
    }

    #[test]
    fn unanimous_profiles_never_move() {
        let g = gen_cycle(10).unwrap();
        let p = Profile::uniform(10, &ord("2 0 1"));
        let mut r = rng::from_seed(1);
        for _ in 0..20 {
            let (next, swaps) = spd_round(&g, &p, &mut r);
            assert_eq!(swaps, 0);
            assert_eq!(next, p);
            assert_eq!(random_pd_round(&g, &p, 0.5, &mut r), p);
        }
        assert!(is_fixed(&g, &p));
    }

    #[test]
    fn star_centre_and_leaves_swap_simultaneously() {
        let g = gen_star(5).unwrap();
        let mut p = Profile::uniform(5, &ord("1 0 2"));
        p.set_order(0, &ord("0 1 2"));
        // Everybody draws {0, 1}. The centre sees 4 of 4 disagreeing, each
        // leaf sees its only neighbour disagreeing, and all read the old
        // profile, so the two camps trade places.
        let pairs = vec![(0, 1); 5];
        let (next, swaps) = spd_apply(&g, &p, &pairs, 0..5);
        assert_eq!(swaps, 5);
        assert_eq!(next.order(0), ord("1 0 2"));
        for v in 1..5 {
            assert_eq!(next.order(v), ord("0 1 2"));
        }
        // Only the centre draws {0, 1}: it alone moves.
        let mut pairs = vec![(0, 2); 5];
        pairs[0] = (0, 1);
        let (next, swaps) = spd_apply(&g, &p, &pairs, 0..5);
        assert_eq!(swaps, 1);
        assert!(next.is_consensus());
    }

    #[test]
    fn fixed_profiles() {
        // two triangles 0-1-2 and 3-4-5 bridged by 2-3
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let mut p = Profile::uniform(6, &ord("0 1 2"));
        for v in 3..6 {
            p.set_order(v, &ord("2 1 0"));
        }
        assert!(is_fixed(&g, &p));

        let edge = gen_path(2).unwrap();
        let p = Profile::from_orders(&[ord("0 1 2"), ord("2 1 0")]).unwrap();
        assert!(!is_fixed(&edge, &p));
    }

    #[test]
    fn evaluation_order_is_irrelevant() {
        let g = gen_complete(12).unwrap();
        let p = random_profile(12, 4, 9, None).unwrap();
        let mut r = rng::from_seed(3);
        for _ in 0..50 {
            let pairs = draw_pairs(12, 4, &mut r);
            let forward = spd_apply(&g, &p, &pairs, 0..12);
            let backward = spd_apply(&g, &p, &pairs, (0..12).rev());
            assert_eq!(forward, backward);
        }
    }

    #[test]
    fn zero_similarity_never_swaps() {
        let g = gen_path(2).unwrap();
        let p = Profile::from_orders(&[ord("0 1 2"), ord("1 0 2")]).unwrap();
        let table = SimilarityTable::constant(&g, 0.0);
        let mut r = rng::from_seed(5);
        for _ in 0..30 {
            assert_eq!(similarity_spd_round(&g, &p, &table, &mut r).1, 0);
        }
        assert!(is_fixed_weighted(&g, &p, &table));
        assert!(!is_fixed(&g, &p));
    }

    #[test]
    fn constant_similarity_matches_counting() {
        for g in [gen_complete(7).unwrap(), gen_cycle(9).unwrap(), gen_star(6).unwrap()] {
            let table = SimilarityTable::constant(&g, 0.3);
            let p = random_profile(g.n(), 4, 21, None).unwrap();
            let mut r = rng::from_seed(8);
            for _ in 0..40 {
                let pairs = draw_pairs(g.n(), 4, &mut r);
                assert_eq!(spd_apply(&g, &p, &pairs, 0..g.n()), spd_apply_weighted(&g, &p, &table, &pairs));
            }
        }
    }

    #[test]
    fn weighted_rule_on_triangle_with_pendant() {
        // triangle 0-1-2, pendant 3 on 2
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let table = SimilarityTable::new(&g);
        // S(2,0) = S(2,1) = 1/(3+2) = 0.2, S(2,3) = 0/(3+1) = 0
        let w: Vec<f64> = table.weights(2).to_vec();
        assert_eq!(w, vec![0.2, 0.2, 0.0]);
        // node 2 holds 0≻1≻2; neighbours 0, 1 disagree on (0,1), pendant agrees
        let p = Profile::from_orders(&[ord("1 0 2"), ord("1 0 2"), ord("0 1 2"), ord("0 1 2")]).unwrap();
        assert!(weighted_swaps(&g, &table, &p, 2, 0, 1));
        // with only neighbour 0 and the pendant disagreeing: 0.2 + 0 against 0.2 with, no swap
        let p = Profile::from_orders(&[ord("1 0 2"), ord("0 1 2"), ord("0 1 2"), ord("1 0 2")]).unwrap();
        assert!(!weighted_swaps(&g, &table, &p, 2, 0, 1));
        // the counting rule would swap here: 2 of 3 disagree
        assert!(majority_swaps(&g, &p, 2, 0, 1));
    }

    #[test]
    fn random_pd_two_nodes_enumeration() {
        let g = gen_path(2).unwrap();
        let p = Profile::from_orders(&[ord("0 1"), ord("1 0")]).unwrap();
        let mut r = rng::from_seed(77);
        let trials = 40_000;
        let hits = (0..trials)
            .filter(|_| random_pd_round(&g, &p, 0.5, &mut r).is_consensus())
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }
}
