//! Command-line interface for template synthesis on weighted games.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qastel_cli::bench::{
    bench_conflict_rounds, bench_fault_tolerance, bench_incremental, conflict_records_to_csv,
    fault_records_to_csv, incremental_records_to_csv, qastel_csv, BenchConfig,
};
use qastel_core::fixpoint::{
    fixpoint, node_from_edge_values, winning_region_fixed_credit, winning_region_unknown_credit,
    EdgeValues,
};
use qastel_core::format::{
    parse_objectives, parse_pgsolver_parity, parse_weighted_game, serialize_weighted_game,
    ParseOptions,
};
use qastel_core::game::{parity_to_mean_payoff, GameGraph, NodeId, ObjectiveSpec, Player};
use qastel_core::mistel::{compute_mistel_from, QualObjective};
use qastel_core::multi::{combine_qastel, MultiMpProblem};
use qastel_core::qastel::Qastel;
use qastel_core::runtime::{
    parse_preference_stream, simulate, Adversary, BlockedPolicy, CombinedController, Controller,
    PreferenceStream, SimStatus, StrategyController, TemplateController,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_UNREALIZABLE: i32 = 1;
const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Parser)]
#[command(
    name = "qastel",
    about = "Strategy-template synthesis for two-player energy and mean-payoff games"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
}

#[derive(Args)]
struct GameInput {
    /// Weighted-game file (PGSolver parity format for `convert`).
    #[arg(long)]
    game: PathBuf,
    /// Node-count validation cap.
    #[arg(long, default_value_t = qastel_core::game::DEFAULT_MAX_NODES)]
    max_nodes: usize,
    /// Weight-magnitude validation cap.
    #[arg(long, default_value_t = qastel_core::game::DEFAULT_MAX_WEIGHT)]
    max_weight_cap: u64,
}

impl GameInput {
    fn options(&self) -> ParseOptions {
        ParseOptions {
            max_nodes: self.max_nodes,
            max_weight: self.max_weight_cap,
        }
    }

    fn load(&self) -> Result<GameGraph> {
        let text = fs::read_to_string(&self.game)
            .with_context(|| format!("reading {}", self.game.display()))?;
        Ok(parse_weighted_game(&text, &self.options())?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: GameInput,
    /// Objective sidecar file.
    #[arg(long)]
    objectives: Option<PathBuf>,
    /// Fixed initial credit (overrides a sidecar `credit:` directive).
    #[arg(long)]
    credit: Option<u64>,
    /// Node whose membership in the winning region decides the exit code.
    #[arg(long)]
    node: Option<usize>,
    /// Output directory for the per-node values CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct TemplateArgs {
    #[command(flatten)]
    input: GameInput,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct MistelArgs {
    #[command(flatten)]
    input: GameInput,
    /// Objective sidecar: `cobuechi-stay:` / `safety:` / `credit:` lines.
    #[arg(long)]
    objectives: PathBuf,
    #[arg(long)]
    credit: Option<u64>,
    #[arg(long)]
    node: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct CombineArgs {
    #[command(flatten)]
    input: GameInput,
    /// Additional weight dimensions: weighted-game files over the same graph.
    #[arg(long = "weights")]
    weights: Vec<PathBuf>,
    /// Steps to simulate the combined strategy (0 skips simulation).
    #[arg(long, default_value_t = 0)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start node for the simulation.
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    node: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AdversaryKind {
    Random,
    Positional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Terminate,
    Recompute,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: GameInput,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    credit: Option<u64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = AdversaryKind::Random)]
    adversary: AdversaryKind,
    /// Preference stream CSV (`t,edge_id,pref`); switches the controller to
    /// template mode.
    #[arg(long)]
    preferences: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PolicyKind::Terminate)]
    policy: PolicyKind,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: GameInput,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 200)]
    min_nodes: usize,
    #[arg(long, default_value_t = 2000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 3.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 5)]
    max_weight: i64,
    /// Avoidance fractions (increment schedule / per-run fractions).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.004, 0.06, 0.12])]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    increments: usize,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Output directory for the experiment CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

impl BenchArgs {
    fn config(&self) -> BenchConfig {
        BenchConfig {
            seed: self.seed,
            instances: self.instances,
            min_nodes: self.min_nodes,
            max_nodes: self.max_nodes,
            avg_degree: self.avg_degree,
            max_weight: self.max_weight,
            avoidance_fractions: self.fractions.clone(),
            increments: self.increments,
            repetitions: self.repetitions,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the energy game (fixed credit when given, else unknown credit).
    SolveEnergy(SolveArgs),
    /// Solve the mean-payoff game.
    SolveMp(SolveArgs),
    /// Synthesize the optimal quantitative template and emit its CSV.
    Qastel(TemplateArgs),
    /// Synthesize a conflict-free mixed template for co-Büchi + quantitative
    /// objectives.
    Mistel(MistelArgs),
    /// Combine templates for several mean-payoff objectives into one
    /// strategy, optionally simulating it.
    Combine(CombineArgs),
    /// Simulate a controller against an adversary, emitting the trace CSV.
    Simulate(SimulateArgs),
    /// Convert a PGSolver parity game into a weighted game.
    Convert(ConvertArgs),
    /// Fault-tolerance experiment: random edge deletions until values change.
    BenchFault(BenchArgs),
    /// Incremental-synthesis experiment: hot-started vs from-scratch.
    BenchIncremental(BenchArgs),
    /// Conflict-resolution experiment: rounds and completeness.
    BenchConflicts(BenchArgs),
}

fn write_output(out: &Option<PathBuf>, file: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            fs::write(&path, content)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn check_node(g: &GameGraph, node: Option<usize>) -> Result<Option<NodeId>> {
    match node {
        Some(id) if id >= g.node_count() => bail!("node {id} is out of range"),
        Some(id) => Ok(Some(NodeId(id as u32))),
        None => Ok(None),
    }
}

/// Exit code from a winning region and an optional queried node.
fn realizability(region: &qastel_core::NodeSet, node: Option<NodeId>) -> i32 {
    let ok = match node {
        Some(u) => region[u.index()],
        None => region.any(),
    };
    if ok {
        0
    } else {
        EXIT_UNREALIZABLE
    }
}

fn sidecar_credit(objectives: &[ObjectiveSpec]) -> Option<u64> {
    objectives.iter().find_map(|o| match o {
        ObjectiveSpec::EnergyFixedCredit(c) => Some(*c),
        _ => None,
    })
}

fn run_solve(args: &SolveArgs, mean_payoff: bool) -> Result<i32> {
    let g = args.input.load()?;
    let node = check_node(&g, args.node)?;
    let mut credit = args.credit;
    if let Some(path) = &args.objectives {
        let text = fs::read_to_string(path)?;
        let objectives = parse_objectives(&text, &g)?;
        credit = credit.or_else(|| sidecar_credit(&objectives));
    }
    if mean_payoff {
        credit = None;
    }
    let (fix, stats) = fixpoint(&g, EdgeValues::zero(&g));
    let values = node_from_edge_values(&g, &fix);
    let region = match credit {
        Some(c) => winning_region_fixed_credit(&g, &fix, c),
        None => winning_region_unknown_credit(&g, &fix),
    };
    let mut csv = String::from("node,owner,optimal_credit,winning\n");
    for u in g.nodes() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            u.index(),
            g.owner(u).index(),
            values.get(u),
            region[u.index()]
        ));
    }
    write_output(&args.out, "values.csv", &csv)?;
    eprintln!(
        "{} nodes, {} edges, {} lifts, winning region size {}",
        g.node_count(),
        g.edge_count(),
        stats.lifts,
        region.count_ones()
    );
    Ok(realizability(&region, node))
}

fn run_qastel(args: &TemplateArgs) -> Result<i32> {
    let g = args.input.load()?;
    write_output(&args.out, "qastel.csv", &qastel_csv(&g))?;
    Ok(0)
}

fn run_mistel(args: &MistelArgs) -> Result<i32> {
    let g = args.input.load()?;
    let node = check_node(&g, args.node)?;
    let text = fs::read_to_string(&args.objectives)
        .with_context(|| format!("reading {}", args.objectives.display()))?;
    let objectives = parse_objectives(&text, &g)?;
    let mut stay = g.full_node_set();
    let mut allowed = g.full_node_set();
    for obj in &objectives {
        match obj {
            ObjectiveSpec::CoBuechi { stay: ids } => {
                let set = g.node_set_from(ids.iter().copied());
                stay &= set;
            }
            ObjectiveSpec::Safety { region } => {
                let set = g.node_set_from(region.iter().copied());
                allowed &= set;
            }
            ObjectiveSpec::EnergyFixedCredit(_) | ObjectiveSpec::EnergyUnknownCredit
            | ObjectiveSpec::MeanPayoff => {}
        }
    }
    let credit = args.credit.or_else(|| sidecar_credit(&objectives));
    let phi = QualObjective { stay, allowed };
    let out = compute_mistel_from(&g, phi, credit, EdgeValues::zero(&g));
    write_output(&args.out, "mistel.txt", &out.mistel.serialize(&g))?;
    eprintln!(
        "{} conflict rounds, {} lifts, winning region size {}",
        out.rounds - 1,
        out.stats.lifts,
        out.mistel.winning.count_ones()
    );
    Ok(realizability(&out.mistel.winning, node))
}

fn load_weight_dimension(g: &GameGraph, path: &Path, opts: &ParseOptions) -> Result<Vec<i64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let other = parse_weighted_game(&text, opts)?;
    if other.node_count() != g.node_count() || other.edge_count() != g.edge_count() {
        bail!("{}: graph structure differs from --game", path.display());
    }
    for u in g.nodes() {
        if other.owner(u) != g.owner(u) {
            bail!("{}: owner of node {} differs", path.display(), u.index());
        }
    }
    for e in g.edges() {
        if other.source(e) != g.source(e) || other.target(e) != g.target(e) {
            bail!("{}: edge {} differs", path.display(), e.index());
        }
    }
    Ok(other.edges().map(|e| other.weight(e)).collect())
}

fn run_combine(args: &CombineArgs) -> Result<i32> {
    let g = args.input.load()?;
    let node = check_node(&g, args.node)?;
    let mut weights = vec![g.edges().map(|e| g.weight(e)).collect::<Vec<i64>>()];
    for path in &args.weights {
        weights.push(load_weight_dimension(&g, path, &args.input.options())?);
    }
    let k = weights.len();
    let problem = MultiMpProblem::new(g.clone(), weights);
    let (region, strategy, stats) = combine_qastel(&problem);
    eprintln!(
        "{} dimensions, {} lifts, combined winning region size {}",
        k,
        stats.lifts,
        region.count_ones()
    );
    let code = realizability(&region, node);
    if args.steps > 0 && code == 0 {
        let start = NodeId(args.start as u32);
        if start.index() >= g.node_count() || !region[start.index()] {
            bail!("start node {} is not in the combined winning region", args.start);
        }
        let mut csv = String::from("step,node,active_dimension,");
        csv.push_str(
            &(0..k)
                .map(|d| format!("avg_{d}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        csv.push('\n');
        let mut controller = CombinedController(strategy);
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut at = start;
        for step in 0..args.steps {
            let edge = match g.owner(at) {
                Player::Zero => match controller.choose(&g, at, 0, step) {
                    qastel_core::runtime::ControlDecision::Take(e) => e,
                    qastel_core::runtime::ControlDecision::Blocked => break,
                },
                Player::One => {
                    let degree = g.out_degree(at);
                    g.out_edges(at).nth(rng.random_range(0..degree)).unwrap()
                }
            };
            controller.observe(&g, edge);
            at = g.target(edge);
            let avgs: Vec<String> = (0..k)
                .map(|d| {
                    controller.0.running_average(d)
                        .map(|a| format!("{a:.6}"))
                        .unwrap_or_default()
                })
                .collect();
            csv.push_str(&format!(
                "{},{},{},{}\n",
                step,
                at.index(),
                controller.0.active_dimension(),
                avgs.join(",")
            ));
        }
        write_output(&args.out, "combine_trace.csv", &csv)?;
    }
    Ok(code)
}

fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let g = args.input.load()?;
    if args.start >= g.node_count() {
        bail!("start node {} is out of range", args.start);
    }
    let start = NodeId(args.start as u32);
    let (fix, _) = fixpoint(&g, EdgeValues::zero(&g));
    let template = Qastel::from_edge_values(&g, &fix);
    let values = node_from_edge_values(&g, &fix);
    let credit = match args.credit {
        Some(c) => c as i64,
        None => values
            .get(start)
            .as_finite()
            .map(|c| c as i64)
            .ok_or_else(|| anyhow!("start node {} has no finite optimal credit", args.start))?,
    };
    let adversary = match args.adversary {
        AdversaryKind::Random => Adversary::Random { seed: args.seed },
        AdversaryKind::Positional => {
            // A fixed positional counter-strategy drawn from the seed.
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut pi = qastel_core::PositionalStrategy::empty(&g);
            for u in g.nodes() {
                if g.owner(u) == Player::One {
                    let degree = g.out_degree(u);
                    pi.set(u, g.out_edges(u).nth(rng.random_range(0..degree)).unwrap());
                }
            }
            Adversary::Positional(pi)
        }
    };
    let mut controller: Box<dyn Controller> = match &args.preferences {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let stream: PreferenceStream = parse_preference_stream(&text, &g)?;
            let policy = match args.policy {
                PolicyKind::Terminate => BlockedPolicy::Terminate,
                PolicyKind::Recompute => BlockedPolicy::Recompute,
            };
            Box::new(TemplateController::new(
                &g,
                template,
                stream,
                args.epsilon,
                policy,
            ))
        }
        None => Box::new(StrategyController(template.extract_strategy(&g))),
    };
    let run = simulate(&g, controller.as_mut(), &adversary, start, credit, args.steps);
    write_output(&args.out, "trace.csv", &run.to_csv())?;
    match run.status {
        SimStatus::Completed => {
            eprintln!("completed {} steps, minimal credit {}", run.len(), run.min_credit());
            Ok(0)
        }
        SimStatus::Blocked { step } => {
            eprintln!("blocked at step {step}");
            Ok(EXIT_UNREALIZABLE)
        }
    }
}

fn run_convert(args: &ConvertArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input.game)
        .with_context(|| format!("reading {}", args.input.game.display()))?;
    let parity = parse_pgsolver_parity(&text, &args.input.options())?;
    let mp = parity_to_mean_payoff(&parity, args.input.max_weight_cap)?;
    write_output(&args.out, "converted.wgame", &serialize_weighted_game(&mp))?;
    Ok(0)
}

fn run_bench(args: &BenchArgs, which: &str) -> Result<i32> {
    let cfg = args.config();
    let started = Instant::now();
    let (file, csv) = match which {
        "fault" => ("fault.csv", fault_records_to_csv(&bench_fault_tolerance(&cfg))),
        "incremental" => (
            "incremental.csv",
            incremental_records_to_csv(&bench_incremental(&cfg)),
        ),
        "conflicts" => (
            "conflicts.csv",
            conflict_records_to_csv(&bench_conflict_rounds(&cfg)),
        ),
        _ => unreachable!(),
    };
    let out = Some(args.out.clone());
    write_output(&out, file, &csv)?;
    eprintln!("experiment finished in {:?}", started.elapsed());
    Ok(0)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::SolveEnergy(args) => run_solve(args, false),
        Cmd::SolveMp(args) => run_solve(args, true),
        Cmd::Qastel(args) => run_qastel(args),
        Cmd::Mistel(args) => run_mistel(args),
        Cmd::Combine(args) => run_combine(args),
        Cmd::Simulate(args) => run_simulate(args),
        Cmd::Convert(args) => run_convert(args),
        Cmd::BenchFault(args) => run_bench(args, "fault"),
        Cmd::BenchIncremental(args) => run_bench(args, "incremental"),
        Cmd::BenchConflicts(args) => run_bench(args, "conflicts"),
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(EXIT_INPUT_ERROR);
        }
    }
}
