//! Scenario drivers, aggregation and CSV output.
//!
//! Every scenario derives one seed per trial from the master seed, runs the
//! trials on the rayon pool and folds the per-trial results in trial order,
//! so output files are byte-identical across reruns and thread counts.

mod cli;

pub use cli::cli_main;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    is_fixed, is_fixed_weighted, run_random_pd, similarity_spd_round, spd_round, Engine, RunConfig, Termination,
};
use crate::error::{Error, Result};
use crate::graph::{
    add_random_edges, gen_clique_with_leaves, gen_complete, gen_cycle, gen_empty, gen_er, gen_path,
    gen_random_regular, gen_slow_convergence, gen_star, parse_edge_list, Graph, NodeSet, SimilarityTable,
};
use crate::preference::{random_profile_with, z_ab, Bias, Order, Profile};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cycle,
    Path,
    Complete,
    Star,
    Empty,
    /// Erdős–Rényi; `param` is the edge probability.
    Er,
    /// Random regular; `param` is the degree.
    Regular,
    /// Clique with leaves; `n` must be a perfect square.
    CliqueLeaves,
    SlowConvergence,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Complete => "complete",
            Family::Star => "star",
            Family::Empty => "empty",
            Family::Er => "er",
            Family::Regular => "regular",
            Family::CliqueLeaves => "clique-leaves",
            Family::SlowConvergence => "slow-convergence",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s {
            "cycle" => Family::Cycle,
            "path" => Family::Path,
            "complete" => Family::Complete,
            "star" => Family::Star,
            "empty" => Family::Empty,
            "er" => Family::Er,
            "regular" => Family::Regular,
            "clique-leaves" => Family::CliqueLeaves,
            "slow-convergence" => Family::SlowConvergence,
            other => return Err(Error::domain(format!("unknown graph family {other:?}"))),
        })
    }

    pub fn build(&self, n: usize, param: Option<f64>, seed: u64) -> Result<Graph> {
        let need = |what: &str| param.ok_or_else(|| Error::domain(format!("family {} needs {what}", self.name())));
        match self {
            Family::Cycle => gen_cycle(n),
            Family::Path => gen_path(n),
            Family::Complete => gen_complete(n),
            Family::Star => gen_star(n),
            Family::Empty => gen_empty(n),
            Family::Er => gen_er(n, need("an edge probability")?, seed),
            Family::Regular => {
                let d = need("a degree")?;
                if d < 0.0 || d.fract() != 0.0 {
                    return Err(Error::domain(format!("degree {d} is not a non-negative integer")));
                }
                gen_random_regular(n, d as usize, seed)
            }
            Family::CliqueLeaves => {
                let k = (n as f64).sqrt().round() as usize;
                if k * k != n {
                    return Err(Error::domain(format!("clique-leaves needs a square n, got {n}")));
                }
                gen_clique_with_leaves(k)
            }
            Family::SlowConvergence => Ok(gen_slow_convergence(n)?.graph),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSource {
    Family {
        family: Family,
        n: usize,
        #[serde(default)]
        param: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    EdgeList {
        path: PathBuf,
    },
}

impl GraphSource {
    pub fn label(&self) -> String {
        match self {
            GraphSource::Family { family, n, .. } => format!("{}-{}", family.name(), n),
            GraphSource::EdgeList { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "edge-list".to_string()),
        }
    }

    /// Loads or generates the graph. Edge-list warnings (self-loops,
    /// duplicates, dropped components) are returned alongside.
    pub fn load(&self) -> Result<(Graph, Vec<String>)> {
        match self {
            GraphSource::Family { family, n, param, seed } => Ok((family.build(*n, *param, *seed)?, Vec::new())),
            GraphSource::EdgeList { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let report = parse_edge_list(&text)?;
                let warnings = report.warnings();
                Ok((report.graph, warnings))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Countermeasure {
    None,
    /// Every node adds this many random edges before the run.
    Cm1(usize),
    /// Similarity-weighted majority.
    Cm2,
}

impl Countermeasure {
    pub fn parse(s: &str) -> Result<Countermeasure> {
        match s {
            "none" => Ok(Countermeasure::None),
            "cm2" => Ok(Countermeasure::Cm2),
            _ => match s.strip_prefix("cm1:") {
                Some(k) => k
                    .parse()
                    .map(Countermeasure::Cm1)
                    .map_err(|_| Error::domain(format!("bad edge count in {s:?}"))),
                None => Err(Error::domain(format!("unknown countermeasure {s:?} (none, cm1:K, cm2)"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Countermeasure::None => "none".to_string(),
            Countermeasure::Cm1(k) => format!("cm1:{k}"),
            Countermeasure::Cm2 => "cm2".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Condorcet,
    Adversary,
    Scaling,
    Martingale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub graphs: Vec<GraphSource>,
    pub alpha: usize,
    pub trials: u64,
    /// Rounds per density run.
    pub rounds: u64,
    /// Weight of the favoured order in the initial profile.
    pub bias: f64,
    pub adversary_frac: f64,
    pub countermeasures: Vec<Countermeasure>,
    /// Families and sizes for the scaling scenario.
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    /// Copy probability for Random PD.
    pub q: f64,
    /// Safety cap for Random PD; `None` uses `64 n²`.
    pub max_rounds: Option<u64>,
    /// Use the similarity-weighted rule in the density scenarios.
    pub weighted: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::Condorcet,
            graphs: Vec::new(),
            alpha: 3,
            trials: 20,
            rounds: 30,
            bias: 0.1,
            adversary_frac: 0.05,
            countermeasures: vec![Countermeasure::None, Countermeasure::Cm1(10), Countermeasure::Cm2],
            families: vec![Family::Cycle, Family::Complete],
            sizes: vec![100, 200, 400, 800],
            q: 0.5,
            max_rounds: None,
            weighted: false,
            seed: 1,
            out: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.alpha < 2 {
            return Err(Error::domain("alpha must be at least 2"));
        }
        for g in &self.graphs {
            if let GraphSource::EdgeList { path } = g {
                if !path.exists() {
                    return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
                }
            }
        }
        Ok(())
    }
}

/// One row of a density series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub round: u64,
    pub graph_label: String,
    pub mean_density: f64,
    pub std_density: f64,
    pub trials: u64,
}

/// One row of the Random PD scaling scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub graph_family: String,
    pub mean_rounds: f64,
    pub std_rounds: f64,
    pub trials: u64,
    pub cap_hits: u64,
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn trial_seed(master: u64, group: u64, trial: u64) -> u64 {
    rng::derive_seed(rng::derive_seed(master, group), trial)
}

/// The `⌈fraction · n⌉` highest-degree nodes, ties broken by smaller id.
pub fn top_degree_placement(graph: &Graph, fraction: f64) -> Result<NodeSet> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::domain(format!("fraction {fraction} outside (0, 1)")));
    }
    let n = graph.n();
    // The epsilon keeps exact products such as 0.2 · 5 from rounding up.
    let k = ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
    Ok(NodeSet::from_nodes(n, ids.into_iter().take(k)))
}

/// Density of `target` after each of `rounds` SPD (or weighted SPD) rounds,
/// starting with round 0. Once the profile is fixed the remaining entries
/// repeat the last value.
pub fn density_series(
    graph: &Graph,
    initial: &Profile,
    table: Option<&SimilarityTable>,
    target: &Order,
    rounds: u64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = rng::from_seed(seed);
    let mut profile = initial.clone();
    let mut out = Vec::with_capacity(rounds as usize + 1);
    out.push(profile.density(target));
    let mut fixed = false;
    for _ in 0..rounds {
        if !fixed {
            let (next, swaps) = match table {
                Some(t) => similarity_spd_round(graph, &profile, t, &mut rng),
                None => spd_round(graph, &profile, &mut rng),
            };
            profile = next;
            if swaps == 0 {
                fixed = match table {
                    Some(t) => is_fixed_weighted(graph, &profile, t),
                    None => is_fixed(graph, &profile),
                };
            }
        }
        out.push(profile.density(target));
    }
    out
}

fn aggregate_series(label: &str, runs: &[Vec<f64>]) -> Vec<SeriesRow> {
    let len = runs.first().map_or(0, Vec::len);
    (0..len)
        .map(|r| {
            let column: Vec<f64> = runs.iter().map(|run| run[r]).collect();
            let (mean, std) = mean_std(&column);
            SeriesRow {
                round: r as u64,
                graph_label: label.to_string(),
                mean_density: mean,
                std_density: std,
                trials: runs.len() as u64,
            }
        })
        .collect()
}

/// Biased random start: each node holds the identity order with probability
/// `bias`, otherwise a uniform order. Density of the identity order per
/// round, averaged over trials, for every configured graph.
pub fn scenario_condorcet(config: &ScenarioConfig) -> Result<Vec<SeriesRow>> {
    config.validate()?;
    let target = Order::identity(config.alpha)?;
    let bias = Bias {
        order: target.clone(),
        weight: config.bias,
    };
    let mut rows = Vec::new();
    for (gi, source) in config.graphs.iter().enumerate() {
        let (graph, _) = source.load()?;
        let table = config.weighted.then(|| SimilarityTable::new(&graph));
        let runs = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(config.seed, gi as u64, t);
                let mut r = rng::stream(seed, 1);
                let initial = random_profile_with(graph.n(), config.alpha, &mut r, Some(&bias))?;
                Ok(density_series(&graph, &initial, table.as_ref(), &target, config.rounds, seed))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(aggregate_series(&source.label(), &runs));
    }
    Ok(rows)
}

/// Top-degree seeds hold the identity order, everybody else its reverse.
pub fn adversary_profile(graph: &Graph, alpha: usize, fraction: f64) -> Result<(Profile, NodeSet)> {
    let target = Order::identity(alpha)?;
    let seeds = top_degree_placement(graph, fraction)?;
    let mut profile = Profile::uniform(graph.n(), &target.reversed());
    for v in seeds.iter() {
        profile.set_order(v, &target);
    }
    Ok((profile, seeds))
}

/// The adversary scenario for every graph and countermeasure. Labels are
/// `<graph>/<countermeasure>`.
pub fn scenario_adversary(config: &ScenarioConfig) -> Result<Vec<SeriesRow>> {
    config.validate()?;
    let target = Order::identity(config.alpha)?;
    let mut rows = Vec::new();
    for (gi, source) in config.graphs.iter().enumerate() {
        let (graph, _) = source.load()?;
        let (initial, _) = adversary_profile(&graph, config.alpha, config.adversary_frac)?;
        for (ci, cm) in config.countermeasures.iter().enumerate() {
            let group = (gi as u64) << 16 | ci as u64;
            let table = matches!(cm, Countermeasure::Cm2).then(|| SimilarityTable::new(&graph));
            let runs = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(config.seed, group, t);
                    Ok(match cm {
                        Countermeasure::Cm1(k) => {
                            let augmented = add_random_edges(&graph, *k, rng::derive_seed(seed, 1))?;
                            density_series(&augmented.graph, &initial, None, &target, config.rounds, seed)
                        }
                        _ => density_series(&graph, &initial, table.as_ref(), &target, config.rounds, seed),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.extend(aggregate_series(&format!("{}/{}", source.label(), cm.label()), &runs));
        }
    }
    Ok(rows)
}

/// Random PD consensus time for every family and size, starting from
/// uniformly random profiles.
pub fn scenario_random_pd_scaling(config: &ScenarioConfig) -> Result<Vec<ScalingRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (fi, family) in config.families.iter().enumerate() {
        for (si, &n) in config.sizes.iter().enumerate() {
            let group = (fi as u64) << 16 | si as u64;
            let graph = family.build(n, None, rng::derive_seed(config.seed, group))?;
            let outcomes = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(config.seed, group, t);
                    let mut r = rng::stream(seed, 1);
                    let initial = random_profile_with(n, config.alpha, &mut r, None)?;
                    let mut run = RunConfig::new(Engine::RandomPd { q: config.q }, seed);
                    run.max_rounds = config.max_rounds;
                    let result = run_random_pd(&graph, &initial, &run)?;
                    Ok((result.rounds_elapsed, result.terminated == Termination::CapHit))
                })
                .collect::<Result<Vec<_>>>()?;
            let done: Vec<f64> = outcomes.iter().filter(|o| !o.1).map(|o| o.0 as f64).collect();
            let (mean, std) = mean_std(&done);
            rows.push(ScalingRow {
                n,
                graph_family: family.name().to_string(),
                mean_rounds: mean,
                std_rounds: std,
                trials: config.trials,
                cap_hits: outcomes.iter().filter(|o| o.1).count() as u64,
            });
        }
    }
    Ok(rows)
}

/// Residual sums of squares of one-parameter fits `y ≈ c · f(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub linear: f64,
    pub quadratic: f64,
    pub n_log_n: f64,
}

/// Least-squares fits through the origin of `y` against `n`, `n²` and
/// `n ln n`, compared by relative residual `Σ ((y - c f) / y)²`.
pub fn fit_residuals(points: &[(f64, f64)]) -> FitReport {
    let residual = |f: &dyn Fn(f64) -> f64| {
        // Weighted by 1/y² so that large sizes do not swamp the comparison.
        let (mut num, mut den) = (0.0, 0.0);
        for &(n, y) in points {
            let w = 1.0 / (y * y);
            num += w * f(n) * y;
            den += w * f(n) * f(n);
        }
        let c = num / den;
        points.iter().map(|&(n, y)| ((y - c * f(n)) / y).powi(2)).sum()
    };
    FitReport {
        linear: residual(&|n| n),
        quadratic: residual(&|n| n * n),
        n_log_n: residual(&|n| n * n.ln()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    /// `Z_ab / 2m`.
    pub predicted: f64,
    pub empirical: f64,
    pub deviation: f64,
    /// 99% Wilson interval for the empirical frequency.
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub cap_hits: u64,
}

/// Runs Random PD to consensus `trials` times and compares how often the
/// winning order ranks `a` above `b` with `Z_ab / 2m`.
pub fn scenario_martingale(
    graph: &Graph,
    initial: &Profile,
    a: usize,
    b: usize,
    q: f64,
    trials: u64,
    seed: u64,
) -> Result<MartingaleReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if graph.m() == 0 {
        return Err(Error::domain("martingale check needs at least one edge"));
    }
    let predicted = z_ab(graph, initial, a, b)? as f64 / (2 * graph.m()) as f64;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let config = RunConfig::new(Engine::RandomPd { q }, rng::derive_seed(seed, t));
            let result = run_random_pd(graph, initial, &config)?;
            Ok(result.winning_order.map(|o| o.rank_of(a) < o.rank_of(b)))
        })
        .collect::<Result<Vec<_>>>()?;
    let settled: Vec<bool> = outcomes.iter().flatten().copied().collect();
    let cap_hits = trials - settled.len() as u64;
    let k = settled.iter().filter(|&&x| x).count() as f64;
    let total = settled.len() as f64;
    let empirical = if total > 0.0 { k / total } else { f64::NAN };
    let (ci_low, ci_high) = wilson(k, total, 2.575_829_303_548_901);
    Ok(MartingaleReport {
        predicted,
        empirical,
        deviation: (empirical - predicted).abs(),
        ci_low,
        ci_high,
        trials,
        cap_hits,
    })
}

fn wilson(k: f64, n: f64, z: f64) -> (f64, f64) {
    if n == 0.0 {
        return (0.0, 1.0);
    }
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Writes rows with a header line. The parent directory must exist.
pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::domain(format!("{other:?}")),
    })?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a C,
}

/// Path of the metadata record written next to `csv`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv.with_file_name(name)
}

/// Writes `<csv>.meta.json` holding the config and crate version.
pub fn write_meta<C: Serialize>(config: &C, csv: &Path) -> Result<PathBuf> {
    let path = meta_path(csv);
    let meta = Meta {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
    };
    let text = serde_json::to_string_pretty(&meta)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
