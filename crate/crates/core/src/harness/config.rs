//! Experiment configuration: a flat `key = value` file, optionally overridden
//! key by key (the CLI maps its flags onto the same keys).

use super::{Algorithm, HarnessError};
use crate::graph::{grid_2d, load_edge_list, preferential_attachment, random_dag, DirectedGraph, WeightModel};
use crate::reductions::GridStep;
use indexmap::IndexMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub const DEFAULT_REPLICATES: u64 = 10_000;

/// Where the graph comes from.
#[derive(Debug, Clone)]
pub enum GraphSource {
    File { path: PathBuf, directed: bool },
    Synthetic(SyntheticGraph),
    InMemory(Arc<DirectedGraph>),
}

/// Synthetic graphs, written `pa:N:M`, `dag:N:P` or `grid:R:C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticGraph {
    PreferentialAttachment { nodes: usize, edges_per_node: usize },
    RandomDag { nodes: usize, max_parents: usize },
    Grid { rows: usize, cols: usize },
}

impl SyntheticGraph {
    pub fn generate(self, seed: u64) -> DirectedGraph {
        match self {
            SyntheticGraph::PreferentialAttachment { nodes, edges_per_node } => {
                preferential_attachment(nodes, edges_per_node, seed)
            }
            SyntheticGraph::RandomDag { nodes, max_parents } => random_dag(nodes, max_parents, seed),
            SyntheticGraph::Grid { rows, cols } => grid_2d(rows, cols),
        }
    }
}

impl FromStr for SyntheticGraph {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("bad generator `{s}` (expected pa:N:M, dag:N:P or grid:R:C)"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [kind, a, b] = parts[..] else { return Err(bad()) };
        let a: usize = a.parse().map_err(|_| bad())?;
        let b: usize = b.parse().map_err(|_| bad())?;
        match kind {
            "pa" if b >= 1 && a > b => Ok(SyntheticGraph::PreferentialAttachment {
                nodes: a,
                edges_per_node: b,
            }),
            "dag" => Ok(SyntheticGraph::RandomDag {
                nodes: a,
                max_parents: b,
            }),
            "grid" => Ok(SyntheticGraph::Grid { rows: a, cols: b }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Label written into every result row.
    pub dataset: String,
    pub source: GraphSource,
    pub weights: WeightModel,
    pub algorithms: Vec<Algorithm>,
    /// Nondecreasing.
    pub budgets: Vec<f64>,
    /// Replicates for the final spread estimate of every cell.
    pub replicates: u64,
    /// Replicates per marginal-gain evaluation inside greedy.
    pub greedy_replicates: u64,
    /// Grid step for `GreedyFrac`.
    pub grid: GridStep,
    pub master_seed: u64,
    /// When false, `wallclock_ms` is written as 0 so that output is reproducible
    /// byte for byte.
    pub record_wallclock: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the graph.
    pub fn new(dataset: impl Into<String>, source: GraphSource) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            source,
            weights: WeightModel::WeightedCascade,
            algorithms: Algorithm::HEURISTICS.to_vec(),
            budgets: vec![1.0, 5.0, 10.0, 20.0, 50.0],
            replicates: DEFAULT_REPLICATES,
            greedy_replicates: 1000,
            grid: GridStep::new(10).expect("nonzero"),
            master_seed: 0,
            record_wallclock: true,
            output: None,
        }
    }

    /// Builds a configuration from `key = value` settings. Recognised keys:
    /// `dataset`, `graph`, `undirected`, `generate`, `weights`, `algos`,
    /// `budgets`, `sims`, `greedy_sims`, `seed`, `delta`, `out`, `wallclock`.
    pub fn from_settings(settings: &Settings) -> Result<Self, HarnessError> {
        for key in settings.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(HarnessError::Config(format!("unknown key `{key}`")));
            }
        }
        let get = |key: &str| settings.get(key).map(String::as_str);
        let directed = !parse_bool(get("undirected").unwrap_or("false"), "undirected")?;
        let source = match (get("graph"), get("generate")) {
            (Some(path), None) => GraphSource::File {
                path: PathBuf::from(path),
                directed,
            },
            (None, Some(kind)) => GraphSource::Synthetic(kind.parse()?),
            (Some(_), Some(_)) => return Err(HarnessError::Config("set only one of `graph` and `generate`".into())),
            (None, None) => return Err(HarnessError::Config("no graph: set `graph` or `generate`".into())),
        };
        let default_name = match &source {
            GraphSource::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into()),
            _ => get("generate").unwrap_or("graph").to_string(),
        };
        let mut cfg = ExperimentConfig::new(get("dataset").map(str::to_string).unwrap_or(default_name), source);
        if let Some(w) = get("weights") {
            cfg.weights = w.parse().map_err(|e| HarnessError::Config(format!("weights: {e}")))?;
        }
        if let Some(list) = get("algos") {
            cfg.algorithms = split_list(list).map(str::parse).collect::<Result<_, _>>()?;
        }
        if let Some(list) = get("budgets") {
            cfg.budgets = split_list(list)
                .map(|b| b.parse::<f64>().map_err(|_| HarnessError::Config(format!("bad budget `{b}`"))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = get("sims") {
            cfg.replicates = parse_num(v, "sims")?;
        }
        cfg.greedy_replicates = match get("greedy_sims") {
            Some(v) => parse_num(v, "greedy_sims")?,
            None => cfg.greedy_replicates.min(cfg.replicates),
        };
        if let Some(v) = get("seed") {
            cfg.master_seed = parse_num(v, "seed")?;
        }
        if let Some(v) = get("delta") {
            cfg.grid = v.parse().map_err(|e| HarnessError::Config(format!("delta: {e}")))?;
        }
        if let Some(v) = get("out") {
            cfg.output = Some(PathBuf::from(v));
        }
        if let Some(v) = get("wallclock") {
            cfg.record_wallclock = parse_bool(v, "wallclock")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicates == 0 || self.greedy_replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("no algorithms".into()));
        }
        if let Some(b) = self.budgets.iter().find(|b| b.is_nan() || **b < 0.0 || b.is_infinite()) {
            return Err(HarnessError::Config(format!("budget {b} must be a nonnegative number")));
        }
        if self.budgets.windows(2).any(|w| w[0] > w[1]) {
            return Err(HarnessError::Config("budgets must be nondecreasing".into()));
        }
        Ok(())
    }

    /// Loads or generates the graph and applies the weight model.
    pub fn load_graph(&self) -> Result<Arc<DirectedGraph>, HarnessError> {
        let g = match &self.source {
            GraphSource::File { path, directed } => load_edge_list(path, *directed)?,
            GraphSource::Synthetic(kind) => kind.generate(self.master_seed),
            GraphSource::InMemory(g) => return Ok(g.clone()),
        };
        Ok(Arc::new(crate::graph::assign_weights(&g, self.weights, self.master_seed)?))
    }
}

const KNOWN_KEYS: [&str; 13] = [
    "dataset",
    "graph",
    "undirected",
    "generate",
    "weights",
    "algos",
    "budgets",
    "sims",
    "greedy_sims",
    "seed",
    "delta",
    "out",
    "wallclock",
];

/// Ordered `key → value` settings; later insertions override earlier ones.
pub type Settings = IndexMap<String, String>;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_settings(text: &str) -> Result<Settings, HarnessError> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(v: &str, key: &str) -> Result<T, HarnessError> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: bad value `{v}`")))
}

fn parse_bool(v: &str, key: &str) -> Result<bool, HarnessError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = "# sweep\ngenerate = pa:100:2\nweights = trivalency\nalgos = DegreeInt, DiscountFrac\n\
                    budgets = 1,5,10\nsims = 200  # quick\nseed = 7\ndelta = 1/4\nwallclock = off\n";
        let cfg = ExperimentConfig::from_settings(&parse_settings(text).unwrap()).unwrap();
        assert_eq!(cfg.dataset, "pa:100:2");
        assert_eq!(cfg.weights, WeightModel::Trivalency);
        assert_eq!(
            cfg.algorithms,
            vec![Algorithm::parse_name("DegreeInt").unwrap(), Algorithm::parse_name("DiscountFrac").unwrap()]
        );
        assert_eq!(cfg.budgets, vec![1.0, 5.0, 10.0]);
        assert_eq!(cfg.replicates, 200);
        assert_eq!(cfg.greedy_replicates, 200);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.grid.steps(), 4);
        assert!(!cfg.record_wallclock);
        assert!(matches!(
            cfg.source,
            GraphSource::Synthetic(SyntheticGraph::PreferentialAttachment {
                nodes: 100,
                edges_per_node: 2
            })
        ));
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut s = parse_settings("graph = data/email.txt\nsims = 50\n").unwrap();
        s.insert("sims".into(), "70".into());
        s.insert("undirected".into(), "true".into());
        let cfg = ExperimentConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.replicates, 70);
        assert_eq!(cfg.dataset, "email");
        assert!(matches!(cfg.source, GraphSource::File { directed: false, .. }));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "sims = 10\n",
            "generate = pa:10:2\ngraph = x\n",
            "generate = pa:10:2\nbudgets = 5,1\n",
            "generate = pa:10:2\nsims = 0\n",
            "generate = pa:10:2\nalgos = Nope\n",
            "generate = ring:10:2\n",
            "generate = pa:10:2\ncolour = blue\n",
            "generate = pa:10:2\ndelta = 0.3\n",
        ];
        for text in bad {
            let result = parse_settings(text).and_then(|s| ExperimentConfig::from_settings(&s));
            assert!(matches!(result, Err(HarnessError::Config(_))), "{text:?}");
        }
        assert!(parse_settings("just words\n").is_err());
    }
}
