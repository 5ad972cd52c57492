use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fracspread::cascade::{
    estimate_spread, exact_spread_small, run_cascade_realized, CascadeModel, InfluenceVector, Realization,
    SpreadEstimate, ThresholdVector,
};
use fracspread::graph::{assign_weights, load_edge_list, write_edge_list, DirectedGraph, NodeId, WeightModel};
use fracspread::harness::{emit_csv, parse_settings, pointwise_gain, run_experiment, write_csv, ExperimentConfig, HarnessError, Settings};
use fracspread::optimize::dag_single_node_spreads;
use fracspread::reductions::{
    amplification_sink_count, amplify_instance, make_cycle_gap, make_path_gap, reduce_independent_set,
    reduce_max_coverage, HardnessInstance,
};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracspread", version, about = "Fractional influence maximization under threshold cascades")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep algorithms over budgets and write one CSV row per cell.
    Run(RunArgs),
    /// Write a constructed instance as an edge list plus a threshold sidecar.
    Gen(GenArgs),
    /// Estimate the spread of an allocation read from a `v x_v` file.
    Estimate(EstimateArgs),
    /// Print the single-node spread of every node of a DAG.
    Dp(DpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; flags override its entries.
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    undirected: bool,
    /// Synthetic graph instead of a file: pa:N:M, dag:N:P or grid:R:C.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    /// wc, trivalency or file.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    budgets: Option<String>,
    #[arg(long)]
    sims: Option<String>,
    #[arg(long)]
    greedy_sims: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Greedy grid step, `1/N` or a decimal.
    #[arg(long)]
    delta: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Write 0 for wallclock_ms so reruns are byte-identical.
    #[arg(long)]
    no_wallclock: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    /// Output prefix: writes PREFIX.txt and, for fixed thresholds, PREFIX.thresholds.
    #[arg(long, global = true, default_value = "instance")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenKind {
    /// Weighted path where a unit of fractional budget activates every node.
    Path { n: usize },
    /// Cycle with weights 1 − K/n (uniform thresholds, no sidecar).
    Cycle { n: usize, budget: f64 },
    /// Independent-set instance built from an undirected edge list.
    Is {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Max-coverage instance; each line of the sets file lists one set's elements.
    Maxcov {
        #[arg(long)]
        sets: PathBuf,
        /// Universe size; defaults to the largest element plus one.
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long)]
        or_tree: bool,
    },
    /// Independent-set instance with sinks that fire once `target` nodes are active.
    Amplify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        target: usize,
        /// Explicit sink count; otherwise computed from --exponent.
        #[arg(long, conflicts_with = "exponent")]
        sinks: Option<usize>,
        #[arg(long)]
        exponent: Option<f64>,
    },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    undirected: bool,
    #[arg(long, default_value = "file")]
    weights: String,
    /// Seed for randomized weight models.
    #[arg(long, default_value_t = 0)]
    weight_seed: u64,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `v x_v` lines, `v` as written in the edge list.
    #[arg(long)]
    x: PathBuf,
    /// `v τ_v` sidecar; the run is then deterministic.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    sims: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exact expectation by enumeration (small instances only).
    #[arg(long, conflicts_with = "thresholds")]
    exact: bool,
}

#[derive(Args)]
struct DpArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

/// Maps to the process exit code.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Data(_) | HarnessError::Csv(_) | HarnessError::Io(_) => Failure::Data(e.into()),
            HarnessError::Config(_) | HarnessError::Optimize(_) | HarnessError::Cascade(_) => Failure::Config(e.into()),
        }
    }
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Gen(args) => generate(args),
        Command::Estimate(args) => estimate(args),
        Command::Dp(args) => dp(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut settings = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Config)?;
            parse_settings(&text)?
        }
        None => Settings::new(),
    };
    let overrides = [
        ("graph", args.graph),
        ("generate", args.generate),
        ("dataset", args.dataset),
        ("weights", args.weights),
        ("algos", args.algos),
        ("budgets", args.budgets),
        ("sims", args.sims),
        ("greedy_sims", args.greedy_sims),
        ("seed", args.seed),
        ("delta", args.delta),
        ("out", args.out),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            // A graph source on the command line replaces whichever one the file set.
            if key == "graph" {
                settings.shift_remove("generate");
            } else if key == "generate" {
                settings.shift_remove("graph");
            }
            settings.insert(key.to_string(), value);
        }
    }
    if args.undirected {
        settings.insert("undirected".into(), "true".into());
    }
    if args.no_wallclock {
        settings.insert("wallclock".into(), "false".into());
    }
    let cfg = ExperimentConfig::from_settings(&settings)?;
    let rows = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => emit_csv(&rows, path)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    if let Ok(table) = pointwise_gain(&rows) {
        for r in &table.rows {
            eprintln!(
                "budget {}: best fractional {:.3}, best integral {:.3}, gain {:+.2}%",
                r.budget,
                r.best_fractional,
                r.best_integral,
                100.0 * r.gain
            );
        }
        eprintln!("gain mean {:+.2}%, median {:+.2}%", 100.0 * table.mean, 100.0 * table.median);
    }
    Ok(())
}

fn generate(args: GenArgs) -> Result<(), Failure> {
    let (graph, thresholds) = match args.kind {
        GenKind::Path { n } => {
            let gap = make_path_gap(n).map_err(config)?;
            (gap.graph, Some(gap.thresholds))
        }
        GenKind::Cycle { n, budget } => (make_cycle_gap(n, budget).map_err(config)?, None),
        GenKind::Is { graph, k } => {
            let inst = independent_set_instance(&graph, k)?;
            (inst.graph().clone(), Some(inst.thresholds))
        }
        GenKind::Maxcov {
            sets,
            elements,
            k,
            copies,
            or_tree,
        } => {
            let sets = read_sets(&sets)?;
            let n = elements.unwrap_or_else(|| sets.iter().flatten().max().map_or(0, |&e| e + 1));
            let inst = reduce_max_coverage(&sets, n, k, copies, or_tree).map_err(config)?;
            (inst.graph().clone(), Some(inst.thresholds))
        }
        GenKind::Amplify {
            graph,
            k,
            target,
            sinks,
            exponent,
        } => {
            let inst = independent_set_instance(&graph, k)?;
            let sinks = match (sinks, exponent) {
                (Some(s), _) => s,
                (None, Some(e)) => {
                    let count = amplification_sink_count(inst.graph().node_count(), e).map_err(config)?;
                    usize::try_from(count).map_err(|_| config(anyhow!("{count} sinks do not fit in memory")))?
                }
                (None, None) => return Err(config(anyhow!("amplify needs --sinks or --exponent"))),
            };
            let amplified = amplify_instance(&inst, target as f64, sinks).map_err(config)?;
            (amplified.graph().clone(), Some(amplified.thresholds))
        }
    };

    let edges_path = args.out.with_extension("txt");
    let file = std::fs::File::create(&edges_path)
        .with_context(|| format!("creating {}", edges_path.display()))
        .map_err(Failure::Data)?;
    let mut out = std::io::BufWriter::new(file);
    write_edge_list(&graph, &mut out).and_then(|_| out.flush()).map_err(data)?;
    eprintln!("wrote {} ({} nodes, {} arcs)", edges_path.display(), graph.node_count(), graph.arc_count());
    if let Some(t) = thresholds {
        let path = args.out.with_extension("thresholds");
        write_thresholds(&graph, &t, &path).map_err(data)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn independent_set_instance(path: &Path, k: usize) -> Result<HardnessInstance, Failure> {
    let g = load_edge_list(path, false)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(Failure::Data)?;
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (e.source as usize, e.target as usize))
        .filter(|(u, v)| u < v)
        .collect();
    reduce_independent_set(g.node_count(), &edges, k).map_err(config)
}

fn read_sets(path: &Path) -> Result<Vec<Vec<usize>>, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('#'))
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|e| e.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| data(anyhow!("{}: set {}: {e}", path.display(), i)))
        })
        .collect()
}

fn write_thresholds(g: &DirectedGraph, t: &ThresholdVector, path: &Path) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (v, tau) in t.values().iter().enumerate() {
        writeln!(out, "{} {tau}", g.label(v as NodeId))?;
    }
    out.flush()?;
    Ok(())
}

fn load_weighted(args: &GraphArgs) -> Result<DirectedGraph, Failure> {
    let model: WeightModel = args.weights.parse().map_err(|e: String| config(anyhow!(e)))?;
    let g = load_edge_list(&args.graph, !args.undirected)
        .with_context(|| format!("loading {}", args.graph.display()))
        .map_err(Failure::Data)?;
    assign_weights(&g, model, args.weight_seed).map_err(data)
}

/// Reads `label value` lines into a dense per-node vector; unlisted nodes get `default`.
fn read_node_values(g: &DirectedGraph, path: &Path, default: f64) -> Result<Vec<f64>, Failure> {
    let ids: HashMap<u64, usize> = g.labels().iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)?;
    let mut values = vec![default; g.node_count()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || data(anyhow!("{}:{}: expected `v value`", path.display(), i + 1));
        let [v, value] = line.split_whitespace().collect::<Vec<_>>()[..] else { return Err(bad()) };
        let v: u64 = v.parse().map_err(|_| bad())?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        let &id = ids
            .get(&v)
            .ok_or_else(|| data(anyhow!("{}:{}: node {v} is not in the graph", path.display(), i + 1)))?;
        values[id] = value;
    }
    Ok(values)
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let g = load_weighted(&args.graph)?;
    let x = InfluenceVector::new(read_node_values(&g, &args.x, 0.0)?).map_err(data)?;
    let thresholds = match &args.thresholds {
        Some(path) => Some(ThresholdVector::fixed(read_node_values(&g, path, 1.0)?).map_err(data)?),
        None => None,
    };
    let model = CascadeModel::linear_clamped(g);
    let est = if let Some(t) = thresholds {
        let outcome = run_cascade_realized(&model, &[], &x, &Realization::fixed(t)).map_err(data)?;
        SpreadEstimate::exact(outcome.spread)
    } else if args.exact {
        SpreadEstimate::exact(exact_spread_small(&model, &x).map_err(config)?)
    } else {
        estimate_spread(&model, &x, args.sims, args.seed).map_err(config)?
    };
    println!("mean_spread {}", est.mean);
    println!("stderr {}", est.stderr);
    println!("replicates {}", est.replicates);
    println!("budget {}", x.budget_used());
    Ok(())
}

fn dp(args: DpArgs) -> Result<(), Failure> {
    let g = load_weighted(&args.graph)?;
    let spreads = dag_single_node_spreads(&g).map_err(data)?;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    for (v, s) in spreads.iter().enumerate() {
        writeln!(out, "{} {s}", g.label(v as NodeId)).map_err(data)?;
    }
    out.flush().map_err(data)?;
    Ok(())
}
