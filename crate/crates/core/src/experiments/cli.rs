//! Command-line front end. Every successful command ends with one
//! `key=value` summary line on stdout.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::{
    fit_residuals, scenario_adversary, scenario_condorcet, scenario_martingale, scenario_random_pd_scaling,
    write_csv, write_meta, Countermeasure, Family, GraphSource, Scenario, ScenarioConfig,
};
use crate::dynamics::{run_random_pd, run_to_fixed, Engine, RunConfig, Termination};
use crate::error::{Error, Result};
use crate::graph::{lambda_with, Graph, SpectralMethod};
use crate::preference::{random_profile_with, Bias, Order, Profile};
use crate::rng;
use crate::solutions::{
    falsify_solution, mc_cycle, ns_complete, ns_cycle, ns_empty, ns_path, ns_star, Falsification, Placement,
};

#[derive(Parser, Debug)]
#[command(name = "prefdiff", version, about = "Preference diffusion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one engine from random (optionally biased) profiles.
    Simulate(SimulateArgs),
    /// Run a scenario and write its CSV series.
    Experiment(ExperimentArgs),
    /// Exact number of solutions on a structured graph.
    CountSolutions(CountArgs),
    /// Minimum solution cost.
    MinCost(CountArgs),
    /// Search for a counterexample to a claimed solution.
    Falsify(FalsifyArgs),
    /// Second-largest absolute eigenvalue of the normalised adjacency matrix.
    Spectral(SpectralArgs),
    /// Write a generated graph as an edge list.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    /// Generated family: cycle, path, complete, star, empty, er, regular,
    /// clique-leaves, slow-convergence.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability for `er`.
    #[arg(long)]
    q: Option<f64>,
    /// Degree for `regular`.
    #[arg(long)]
    d: Option<usize>,
    /// Seed for random families.
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GraphArgs {
    fn source(&self) -> Result<GraphSource> {
        match (&self.graph, &self.family) {
            (Some(path), _) => Ok(GraphSource::EdgeList { path: path.clone() }),
            (None, Some(name)) => {
                let family = Family::parse(name)?;
                let n = self.n.ok_or_else(|| Error::domain("--family needs --n"))?;
                let param = match family {
                    Family::Er => Some(self.q.ok_or_else(|| Error::domain("--family er needs --q"))?),
                    Family::Regular => Some(self.d.ok_or_else(|| Error::domain("--family regular needs --d"))? as f64),
                    _ => None,
                };
                Ok(GraphSource::Family {
                    family,
                    n,
                    param,
                    seed: self.graph_seed,
                })
            }
            (None, None) => Err(Error::domain("give --graph PATH or --family NAME --n N")),
        }
    }

    fn load(&self) -> Result<Graph> {
        let (graph, warnings) = self.source()?.load()?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        Ok(graph)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EngineArg {
    Spd,
    Apd,
    Randompd,
    Simspd,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 3)]
    alpha: usize,
    #[arg(long, value_enum, default_value = "spd")]
    engine: EngineArg,
    /// Copy probability for Random PD.
    #[arg(long, default_value_t = 0.5)]
    pd_q: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Round cap; defaults to the engine's safety cap.
    #[arg(long)]
    rounds: Option<u64>,
    /// Probability that a node starts with the identity order.
    #[arg(long, default_value_t = 0.0)]
    bias: f64,
    /// Per-trial CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScenarioArg {
    Condorcet,
    Adversary,
    Scaling,
    Martingale,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    scenario: ScenarioArg,
    /// JSON scenario config; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Directory searched for `--dataset` edge lists.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// File name of an edge list inside `--data-dir`.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    bias: Option<f64>,
    #[arg(long)]
    adversary_frac: Option<f64>,
    /// none, cm1:K or cm2; repeatable.
    #[arg(long)]
    countermeasure: Vec<String>,
    /// Families for the scaling scenario; repeatable.
    #[arg(long = "scaling-family")]
    scaling_family: Vec<String>,
    /// Comma-separated sizes for the scaling scenario.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    pd_q: Option<f64>,
    /// Use the similarity-weighted rule in density scenarios.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    alpha: usize,
}

#[derive(Args, Debug)]
struct FalsifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    placement: PathBuf,
    #[arg(long, default_value_t = 3)]
    alpha: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Auto,
    Dense,
    Iterative,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::CountSolutions(args) => count_solutions(args),
        Command::MinCost(args) => min_cost(args),
        Command::Falsify(args) => falsify(args),
        Command::Spectral(args) => spectral(args),
        Command::Generate(args) => generate(args),
    }
}

#[derive(Serialize)]
struct SimRow {
    trial: u64,
    rounds: u64,
    terminated: &'static str,
    winning_order: String,
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Fixed => "fixed",
        Termination::Consensus => "consensus",
        Termination::CapHit => "cap_hit",
    }
}

fn simulate(args: SimulateArgs) -> Result<String> {
    let graph = args.graph.load()?;
    let engine = match args.engine {
        EngineArg::Spd => Engine::Spd,
        EngineArg::Apd => Engine::Apd,
        EngineArg::Randompd => Engine::RandomPd { q: args.pd_q },
        EngineArg::Simspd => Engine::SimilaritySpd,
    };
    let bias = (args.bias > 0.0).then(|| -> Result<Bias> {
        Ok(Bias {
            order: Order::identity(args.alpha)?,
            weight: args.bias,
        })
    });
    let bias = bias.transpose()?;
    let mut rows = Vec::new();
    for t in 0..args.trials {
        let seed = rng::derive_seed(args.seed, t);
        let mut r = rng::stream(seed, 1);
        let initial: Profile = random_profile_with(graph.n(), args.alpha, &mut r, bias.as_ref())?;
        let mut config = RunConfig::new(engine, seed);
        config.max_rounds = args.rounds;
        let result = match engine {
            Engine::RandomPd { .. } => run_random_pd(&graph, &initial, &config)?,
            _ => run_to_fixed(&graph, &initial, &config)?,
        };
        rows.push(SimRow {
            trial: t,
            rounds: result.rounds_elapsed,
            terminated: termination_name(result.terminated),
            winning_order: result.winning_order.map(|o| o.to_string()).unwrap_or_default(),
        });
    }
    if let Some(out) = &args.out {
        write_csv(&rows, out)?;
    }
    let count = |name: &str| rows.iter().filter(|r| r.terminated == name).count();
    let mean = rows.iter().map(|r| r.rounds as f64).sum::<f64>() / rows.len().max(1) as f64;
    Ok(format!(
        "command=simulate engine={} n={} m={} alpha={} trials={} mean_rounds={:.3} consensus={} fixed={} cap_hits={}",
        engine.name(),
        graph.n(),
        graph.m(),
        args.alpha,
        args.trials,
        mean,
        count("consensus"),
        count("fixed"),
        count("cap_hit")
    ))
}

fn experiment(args: ExperimentArgs) -> Result<String> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<ScenarioConfig>(&text)?
        }
        None => ScenarioConfig::default(),
    };
    config.scenario = match args.scenario {
        ScenarioArg::Condorcet => Scenario::Condorcet,
        ScenarioArg::Adversary => Scenario::Adversary,
        ScenarioArg::Scaling => Scenario::Scaling,
        ScenarioArg::Martingale => Scenario::Martingale,
    };
    if let Some(name) = &args.dataset {
        let dir = args.data_dir.clone().unwrap_or_else(|| PathBuf::from("data"));
        config.graphs = vec![GraphSource::EdgeList { path: dir.join(name) }];
    } else if args.graph.graph.is_some() || args.graph.family.is_some() {
        config.graphs = vec![args.graph.source()?];
    }
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = args.$field {
                config.$field = v;
            }
        };
    }
    set!(alpha);
    set!(trials);
    set!(seed);
    set!(rounds);
    set!(bias);
    set!(adversary_frac);
    if let Some(q) = args.pd_q {
        config.q = q;
    }
    if !args.countermeasure.is_empty() {
        config.countermeasures = args
            .countermeasure
            .iter()
            .map(|s| Countermeasure::parse(s))
            .collect::<Result<_>>()?;
    }
    if !args.scaling_family.is_empty() {
        config.families = args.scaling_family.iter().map(|s| Family::parse(s)).collect::<Result<_>>()?;
    }
    if !args.sizes.is_empty() {
        config.sizes = args.sizes.clone();
    }
    config.weighted |= args.weighted;
    if args.out.is_some() {
        config.out = args.out.clone();
    }

    let needs_graph = !matches!(config.scenario, Scenario::Scaling);
    if needs_graph && config.graphs.is_empty() {
        return Err(Error::domain("this scenario needs --graph, --family or --dataset"));
    }
    let summary = match config.scenario {
        Scenario::Condorcet | Scenario::Adversary => {
            let rows = if config.scenario == Scenario::Condorcet {
                scenario_condorcet(&config)?
            } else {
                scenario_adversary(&config)?
            };
            emit(&rows, &config)?;
            let last = rows.iter().filter(|r| r.round == config.rounds);
            let finals: Vec<String> = last
                .map(|r| format!("final_density[{}]={:.4}", r.graph_label, r.mean_density))
                .collect();
            format!("rows={} {}", rows.len(), finals.join(" "))
        }
        Scenario::Scaling => {
            let rows = scenario_random_pd_scaling(&config)?;
            emit(&rows, &config)?;
            let mut parts = vec![format!("rows={}", rows.len())];
            for family in &config.families {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.graph_family == family.name())
                    .map(|r| (r.n as f64, r.mean_rounds))
                    .collect();
                if pts.len() >= 2 {
                    let fit = fit_residuals(&pts);
                    parts.push(format!(
                        "fit[{}]=linear:{:.4e},quadratic:{:.4e},nlogn:{:.4e}",
                        family.name(),
                        fit.linear,
                        fit.quadratic,
                        fit.n_log_n
                    ));
                }
            }
            parts.push(format!("cap_hits={}", rows.iter().map(|r| r.cap_hits).sum::<u64>()));
            parts.join(" ")
        }
        Scenario::Martingale => {
            let (graph, _) = config.graphs[0].load()?;
            // Node 0 holds the identity order, everybody else its reverse.
            let target = Order::identity(config.alpha)?;
            let mut initial = Profile::uniform(graph.n(), &target.reversed());
            initial.set_order(0, &target);
            let report = scenario_martingale(&graph, &initial, 0, 1, config.q, config.trials, config.seed)?;
            if let Some(out) = &config.out {
                fs::write(out, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(out, e))?;
                write_meta(&config, out)?;
            }
            format!(
                "predicted={:.6} empirical={:.6} deviation={:.6} ci99=[{:.6},{:.6}] trials={} cap_hits={}",
                report.predicted,
                report.empirical,
                report.deviation,
                report.ci_low,
                report.ci_high,
                report.trials,
                report.cap_hits
            )
        }
    };
    let name = match config.scenario {
        Scenario::Condorcet => "condorcet",
        Scenario::Adversary => "adversary",
        Scenario::Scaling => "scaling",
        Scenario::Martingale => "martingale",
    };
    Ok(format!("command=experiment scenario={name} {summary}"))
}

fn emit<T: Serialize>(rows: &[T], config: &ScenarioConfig) -> Result<()> {
    if let Some(out) = &config.out {
        write_csv(rows, out)?;
        write_meta(config, out)?;
    }
    Ok(())
}

fn count_solutions(args: CountArgs) -> Result<String> {
    let count = match args.family.as_str() {
        "cycle" => ns_cycle(args.n, args.alpha)?,
        "path" => ns_path(args.n, args.alpha)?,
        "complete" => ns_complete(args.n, args.alpha)?,
        "star" => ns_star(args.n, args.alpha)?,
        "empty" => ns_empty(args.n)?,
        other => {
            return Err(Error::domain(format!(
                "no exact count for family {other:?} (cycle, path, complete, star, empty)"
            )))
        }
    };
    Ok(format!(
        "command=count-solutions family={} n={} alpha={} count={count}",
        args.family, args.n, args.alpha
    ))
}

fn min_cost(args: CountArgs) -> Result<String> {
    if args.family != "cycle" {
        return Err(Error::domain("min-cost is only available for --family cycle"));
    }
    let cost = mc_cycle(args.n, args.alpha)?;
    Ok(format!("command=min-cost family=cycle n={} alpha={} cost={cost}", args.n, args.alpha))
}

fn falsify(args: FalsifyArgs) -> Result<String> {
    let graph = GraphArgs {
        graph: Some(args.graph.clone()),
        family: None,
        n: None,
        q: None,
        d: None,
        graph_seed: 0,
    }
    .load()?;
    let text = fs::read_to_string(&args.placement).map_err(|e| Error::io(&args.placement, e))?;
    let placement = Placement::from_text(&text, args.alpha)?;
    Ok(match falsify_solution(&graph, &placement, args.trials, args.seed)? {
        Falsification::Counterexample { trial, result } => format!(
            "command=falsify outcome=counterexample trial={trial} rounds={} trials={}",
            result.rounds_elapsed, args.trials
        ),
        Falsification::NotFalsified => format!("command=falsify outcome=not_falsified trials={}", args.trials),
    })
}

fn spectral(args: SpectralArgs) -> Result<String> {
    let graph = args.graph.load()?;
    let method = match args.method {
        MethodArg::Auto => SpectralMethod::Auto,
        MethodArg::Dense => SpectralMethod::Dense,
        MethodArg::Iterative => SpectralMethod::Iterative,
    };
    let lam = lambda_with(&graph, method)?;
    Ok(format!("command=spectral n={} m={} lambda={lam:.12}", graph.n(), graph.m()))
}

fn generate(args: GenerateArgs) -> Result<String> {
    let graph = args.graph.load()?;
    fs::write(&args.out, graph.to_edge_list()).map_err(|e| Error::io(&args.out, e))?;
    Ok(format!(
        "command=generate n={} m={} out={}",
        graph.n(),
        graph.m(),
        args.out.display()
    ))
}
