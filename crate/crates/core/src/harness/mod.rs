//! Budget sweeps: every (algorithm, budget) cell computes an allocation and
//! estimates its spread; rows go to CSV.

mod config;

pub use config::{parse_settings, ExperimentConfig, GraphSource, Settings, SyntheticGraph, DEFAULT_REPLICATES};

use crate::cascade::{estimate_spread, spread_of_set, CascadeError, CascadeModel, SpreadEstimate};
use crate::graph::{DirectedGraph, GraphError};
use crate::optimize::{
    greedy_fractional, greedy_integral, heuristic_allocate, AllocationResult, BudgetedProblem, Estimator,
    GreedyMode, Heuristic, OptimizeError,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] GraphError),
    #[error("{0}")]
    Optimize(#[from] OptimizeError),
    #[error("{0}")]
    Cascade(#[from] CascadeError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// A heuristic, or greedy with Monte-Carlo marginal gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Heuristic(Heuristic),
    GreedyFrac,
    GreedyInt,
}

impl Algorithm {
    pub const HEURISTICS: [Algorithm; 6] = [
        Algorithm::Heuristic(Heuristic::DegreeInt),
        Algorithm::Heuristic(Heuristic::DiscountInt),
        Algorithm::Heuristic(Heuristic::RandomInt),
        Algorithm::Heuristic(Heuristic::DegreeFrac),
        Algorithm::Heuristic(Heuristic::DiscountFrac),
        Algorithm::Heuristic(Heuristic::UniformFrac),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Heuristic(h) => h.name(),
            Algorithm::GreedyFrac => "GreedyFrac",
            Algorithm::GreedyInt => "GreedyInt",
        }
    }

    pub fn is_fractional(self) -> bool {
        match self {
            Algorithm::Heuristic(h) => h.is_fractional(),
            Algorithm::GreedyFrac => true,
            Algorithm::GreedyInt => false,
        }
    }

    pub fn parse_name(s: &str) -> Result<Self, HarnessError> {
        s.parse()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("GreedyFrac") {
            return Ok(Algorithm::GreedyFrac);
        }
        if s.eq_ignore_ascii_case("GreedyInt") {
            return Ok(Algorithm::GreedyInt);
        }
        s.parse::<Heuristic>()
            .map(Algorithm::Heuristic)
            .map_err(|_| HarnessError::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub budget: f64,
    pub mean_spread: f64,
    pub stderr: f64,
    pub wallclock_ms: f64,
    pub seed: u64,
}

/// Seed of one cell, a function of the master seed, the algorithm name and the
/// budget only.
pub fn cell_seed(master_seed: u64, algorithm: Algorithm, budget: f64) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&budget.to_bits().to_le_bytes());
    let name = algorithm.name().as_bytes();
    let len = name.len().min(16);
    key[16..16 + len].copy_from_slice(&name[..len]);
    ChaCha8Rng::from_seed(key).next_u64()
}

/// Runs every (algorithm, budget) cell. Rows come back sorted by algorithm name,
/// then budget, and depend only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let graph = cfg.load_graph()?;
    let n = graph.node_count();
    if let Some(b) = cfg.budgets.iter().find(|&&b| b > n as f64) {
        return Err(HarnessError::Config(format!("budget {b} exceeds the node count {n}")));
    }
    let model = CascadeModel::linear_clamped(graph.clone());
    let cells: Vec<(Algorithm, f64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.budgets.iter().map(move |&b| (a, b)))
        .collect();
    let mut rows = cells
        .into_par_iter()
        .map(|(algorithm, budget)| run_cell(cfg, &graph, &model, algorithm, budget))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.budget.total_cmp(&b.budget)));
    rows.dedup();
    Ok(rows)
}

fn run_cell(
    cfg: &ExperimentConfig,
    graph: &DirectedGraph,
    model: &CascadeModel,
    algorithm: Algorithm,
    budget: f64,
) -> Result<ResultRow, HarnessError> {
    let seed = cell_seed(cfg.master_seed, algorithm, budget);
    let start = Instant::now();
    let allocation = allocate(cfg, graph, model, algorithm, budget, seed)?;
    let estimate: SpreadEstimate = if algorithm.is_fractional() {
        estimate_spread(model, &allocation.x, cfg.replicates, seed)?
    } else {
        spread_of_set(model, &allocation.x.support(), cfg.replicates, seed)?
    };
    let wallclock_ms = if cfg.record_wallclock {
        (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
    } else {
        0.0
    };
    Ok(ResultRow {
        dataset: cfg.dataset.clone(),
        algorithm: algorithm.name().to_string(),
        budget,
        mean_spread: estimate.mean,
        stderr: estimate.stderr,
        wallclock_ms,
        seed,
    })
}

fn allocate(
    cfg: &ExperimentConfig,
    graph: &DirectedGraph,
    model: &CascadeModel,
    algorithm: Algorithm,
    budget: f64,
    seed: u64,
) -> Result<AllocationResult, HarnessError> {
    let greedy_problem = || {
        let estimator = Estimator::MonteCarlo {
            replicates: cfg.greedy_replicates,
            seed,
        };
        BudgetedProblem::new(model.clone(), budget, cfg.grid, estimator)
    };
    Ok(match algorithm {
        Algorithm::Heuristic(h) => heuristic_allocate(h, graph, budget, seed)?,
        Algorithm::GreedyFrac => greedy_fractional(&greedy_problem()?, GreedyMode::Lazy)?,
        Algorithm::GreedyInt => greedy_integral(&greedy_problem()?, GreedyMode::Lazy)?,
    })
}

pub const CSV_HEADER: &str = "dataset,algorithm,budget,mean_spread,stderr,wallclock_ms,seed";

/// Writes `rows` in the given order with a header line.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected header `{}`", header.join(","))));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, HarnessError> {
    parse_csv(std::fs::File::open(path)?)
}

/// Best fractional against best integral spread at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub dataset: String,
    pub budget: f64,
    pub best_fractional: f64,
    pub best_integral: f64,
    /// `best_fractional / best_integral − 1`; zero when both are zero.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    pub rows: Vec<GainRow>,
    pub mean: f64,
    pub median: f64,
}

/// Per (dataset, budget) gain of the best fractional algorithm over the best
/// integral one, with the mean and median over all groups.
pub fn pointwise_gain(rows: &[ResultRow]) -> Result<GainTable, HarnessError> {
    // (dataset, budget) with the best fractional and best integral mean seen so far.
    type Group = ((String, f64), Option<f64>, Option<f64>);
    let mut groups: Vec<Group> = Vec::new();
    for row in rows {
        let fractional = row.algorithm.parse::<Algorithm>()?.is_fractional();
        let key = (row.dataset.clone(), row.budget);
        let idx = match groups.iter().position(|(k, _, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, None, None));
                groups.len() - 1
            }
        };
        let slot = if fractional { &mut groups[idx].1 } else { &mut groups[idx].2 };
        *slot = Some(slot.map_or(row.mean_spread, |best| best.max(row.mean_spread)));
    }
    groups.sort_by(|a, b| a.0 .0.cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));

    let mut table = Vec::with_capacity(groups.len());
    for ((dataset, budget), frac, int) in groups {
        let (Some(best_fractional), Some(best_integral)) = (frac, int) else {
            return Err(HarnessError::Config(format!(
                "{dataset} at budget {budget} needs both a fractional and an integral algorithm"
            )));
        };
        let gain = if best_fractional == best_integral {
            0.0
        } else {
            best_fractional / best_integral - 1.0
        };
        table.push(GainRow {
            dataset,
            budget,
            best_fractional,
            best_integral,
            gain,
        });
    }
    if table.is_empty() {
        return Err(HarnessError::Config("no rows".into()));
    }
    let mut gains: Vec<f64> = table.iter().map(|r| r.gain).collect();
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    gains.sort_by(f64::total_cmp);
    let mid = gains.len() / 2;
    let median = if gains.len() % 2 == 1 {
        gains[mid]
    } else {
        0.5 * (gains[mid - 1] + gains[mid])
    };
    Ok(GainTable {
        rows: table,
        mean,
        median,
    })
}
