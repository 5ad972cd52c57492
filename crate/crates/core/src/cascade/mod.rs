//! Threshold cascades under linear, activator-capped and triggering influence
//! functions, for both fractional allocations and integral seed sets.
//!
//! A node `v` that is not yet active joins the active set in the next stage when
//! `min(f_v(S) + x_v, 1) ≥ τ_v`, where `S` is the current active set, `x_v` the direct
//! influence applied to it and `τ_v` its threshold. The min(·, 1) cap is applied
//! for every model, so graphs whose in-weights exceed one (trivalency weights, the
//! activator construction) are handled by the same engine.

mod engine;
mod exact;
mod montecarlo;

pub use engine::{run_cascade, run_cascade_realized, Realization};
pub use exact::{exact_spread_of_set_small, exact_spread_small, EXACT_MAX_BREAKPOINTS, EXACT_MAX_CONTESTED};
pub use montecarlo::{estimate_spread, replicate_spreads, spread_of_set, uniform_thresholds};

pub(crate) use engine::Simulator;

use crate::graph::{DirectedGraph, GraphError, NodeId};
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("{what} has length {got}, expected {expected}")]
    SizeMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("value {value} at node {node} is outside [0, 1]")]
    OutOfRange { node: NodeId, value: f64 },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {node}: triggering set member {member} is not an in-neighbour")]
    NotInNeighbour { node: NodeId, member: NodeId },
    #[error("random triggering sets must be drawn before running a single cascade")]
    MissingTriggeringSets,
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("instance too large for exact evaluation: {0}")]
    TooLarge(String),
    #[error("exact evaluation does not support {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Direct influence `x ∈ [0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceVector {
    values: Vec<f64>,
}

impl InfluenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CascadeError> {
        check_unit_interval(&values)?;
        Ok(InfluenceVector { values })
    }

    pub fn zeros(n: usize) -> Self {
        InfluenceVector { values: vec![0.0; n] }
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self, CascadeError> {
        Self::new(vec![value; n])
    }

    /// The characteristic vector of `set`.
    pub fn indicator(n: usize, set: &[NodeId]) -> Result<Self, CascadeError> {
        let mut values = vec![0.0; n];
        for &v in set {
            *values.get_mut(v as usize).ok_or(CascadeError::UnknownNode(v))? = 1.0;
        }
        Ok(InfluenceVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.values[v as usize]
    }

    pub fn set(&mut self, v: NodeId, value: f64) -> Result<(), CascadeError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(CascadeError::OutOfRange { node: v, value });
        }
        *self.values.get_mut(v as usize).ok_or(CascadeError::UnknownNode(v))? = value;
        Ok(())
    }

    /// `‖x‖₁`.
    pub fn budget_used(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Nodes with positive allocation.
    pub fn support(&self) -> Vec<NodeId> {
        (0..self.values.len() as NodeId).filter(|&v| self.values[v as usize] > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdOrigin {
    Fixed,
    Uniform { master_seed: u64, replicate: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    values: Vec<f64>,
    origin: ThresholdOrigin,
}

impl ThresholdVector {
    pub fn fixed(values: Vec<f64>) -> Result<Self, CascadeError> {
        check_unit_interval(&values)?;
        Ok(ThresholdVector {
            values,
            origin: ThresholdOrigin::Fixed,
        })
    }

    /// The i.i.d. Unif(0, 1] draw used by replicate `replicate` of a Monte-Carlo
    /// run seeded with `master_seed`.
    pub fn uniform(n: usize, master_seed: u64, replicate: u64) -> Self {
        let mut values = vec![0.0; n];
        uniform_thresholds(master_seed, replicate, &mut values);
        ThresholdVector {
            values,
            origin: ThresholdOrigin::Uniform { master_seed, replicate },
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> ThresholdOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_unit_interval(values: &[f64]) -> Result<(), CascadeError> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(CascadeError::OutOfRange {
            node: i as NodeId,
            value: values[i],
        }),
        None => Ok(()),
    }
}

/// One triggering set per node, stored flat.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TriggeringSets {
    offsets: Vec<usize>,
    members: Vec<NodeId>,
}

impl TriggeringSets {
    pub fn new(sets: Vec<Vec<NodeId>>) -> Self {
        let mut out = TriggeringSets {
            offsets: Vec::with_capacity(sets.len() + 1),
            members: Vec::new(),
        };
        out.offsets.push(0);
        for set in sets {
            out.members.extend(set);
            out.offsets.push(out.members.len());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set(&self, v: NodeId) -> &[NodeId] {
        &self.members[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn contains(&self, v: NodeId, u: NodeId) -> bool {
        self.set(v).contains(&u)
    }

    pub fn max_set_size(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    fn clear(&mut self) {
        self.offsets.clear();
        self.offsets.push(0);
        self.members.clear();
    }
}

/// How each node picks its triggering set `T_v ⊆ δ⁻(v)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TriggeringSampler {
    /// Fixed sets, identical in every replicate.
    Deterministic(TriggeringSets),
    /// At most one in-neighbour, `u` with probability `w_uv` (live-edge form of the
    /// linear threshold model). Needs in-weights summing to at most one.
    LiveEdge,
    /// Each in-neighbour `u` independently with probability `w_uv`.
    Independent,
}

impl TriggeringSampler {
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, TriggeringSampler::Deterministic(_))
    }

    /// Draws all sets into `out`.
    pub(crate) fn draw_into<R: Rng>(&self, graph: &DirectedGraph, rng: &mut R, out: &mut TriggeringSets) {
        out.clear();
        match self {
            TriggeringSampler::Deterministic(sets) => out.clone_from(sets),
            TriggeringSampler::LiveEdge => {
                for v in graph.nodes() {
                    let r: f64 = rng.gen();
                    let mut cumulative = 0.0;
                    for (&u, &w) in graph.in_sources(v).iter().zip(graph.in_weights(v)) {
                        cumulative += w;
                        if r < cumulative {
                            out.members.push(u);
                            break;
                        }
                    }
                    out.offsets.push(out.members.len());
                }
            }
            TriggeringSampler::Independent => {
                for v in graph.nodes() {
                    for (&u, &w) in graph.in_sources(v).iter().zip(graph.in_weights(v)) {
                        if rng.gen::<f64>() < w {
                            out.members.push(u);
                        }
                    }
                    out.offsets.push(out.members.len());
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InfluenceKind {
    /// `f_v(S) = Σ_{u ∈ S ∩ δ⁻(v)} w_uv`.
    Linear,
    /// Linear influence where nodes `base_nodes..` are activator nodes: they carry
    /// `delta` on their single arc, never activate unless seeded and count zero in
    /// the objective.
    CappedLinearWithActivators { base_nodes: usize, delta: f64 },
    /// `f_v(S) = 1` if `S ∩ T_v ≠ ∅`, else 0.
    Triggering(TriggeringSampler),
}

/// Influence functions over a shared graph.
#[derive(Debug, Clone)]
pub struct CascadeModel {
    graph: Arc<DirectedGraph>,
    kind: InfluenceKind,
}

impl CascadeModel {
    /// Linear model; the graph must honour `Σ_u w_uv ≤ 1`.
    pub fn linear(graph: impl Into<Arc<DirectedGraph>>) -> Result<Self, CascadeError> {
        let graph = graph.into();
        graph.check_linear_contract()?;
        Ok(CascadeModel {
            graph,
            kind: InfluenceKind::Linear,
        })
    }

    /// Linear model on a graph whose in-weights may exceed one; the total applied
    /// influence is capped at one.
    pub fn linear_clamped(graph: impl Into<Arc<DirectedGraph>>) -> Self {
        CascadeModel {
            graph: graph.into(),
            kind: InfluenceKind::Linear,
        }
    }

    pub fn capped_with_activators(graph: impl Into<Arc<DirectedGraph>>, base_nodes: usize, delta: f64) -> Self {
        let graph = graph.into();
        assert!(base_nodes <= graph.node_count());
        CascadeModel {
            graph,
            kind: InfluenceKind::CappedLinearWithActivators { base_nodes, delta },
        }
    }

    pub fn triggering(graph: impl Into<Arc<DirectedGraph>>, sampler: TriggeringSampler) -> Result<Self, CascadeError> {
        let graph = graph.into();
        match &sampler {
            TriggeringSampler::Deterministic(sets) => {
                if sets.len() != graph.node_count() {
                    return Err(CascadeError::SizeMismatch {
                        what: "triggering sets",
                        got: sets.len(),
                        expected: graph.node_count(),
                    });
                }
                for v in graph.nodes() {
                    if let Some(&member) = sets.set(v).iter().find(|u| !graph.in_sources(v).contains(u)) {
                        return Err(CascadeError::NotInNeighbour { node: v, member });
                    }
                }
            }
            TriggeringSampler::LiveEdge => graph.check_linear_contract()?,
            TriggeringSampler::Independent => {}
        }
        Ok(CascadeModel {
            graph,
            kind: InfluenceKind::Triggering(sampler),
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<DirectedGraph> {
        &self.graph
    }

    pub fn kind(&self) -> &InfluenceKind {
        &self.kind
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Nodes `0..objective_nodes()` count one each in the spread; the rest count zero.
    pub fn objective_nodes(&self) -> usize {
        match self.kind {
            InfluenceKind::CappedLinearWithActivators { base_nodes, .. } => base_nodes,
            _ => self.graph.node_count(),
        }
    }

    pub(crate) fn stochastic_sampler(&self) -> Option<&TriggeringSampler> {
        match &self.kind {
            InfluenceKind::Triggering(s) if s.is_stochastic() => Some(s),
            _ => None,
        }
    }
}

/// One cascade: the seeds, the nodes activated in each stage, and the final set.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// `S_0`; empty for fractional runs.
    pub initial: Vec<NodeId>,
    /// `stage_trace[i]` holds the nodes activated in stage `i + 1`. Stops at the first
    /// stage that activates nothing.
    pub stage_trace: Vec<Vec<NodeId>>,
    /// Sorted.
    pub final_active: Vec<NodeId>,
    /// Objective value of `final_active`.
    pub spread: f64,
    pub thresholds: ThresholdVector,
}

impl CascadeOutcome {
    /// `S_stage`, sorted. Stages past convergence return the final set.
    pub fn active_after(&self, stage: usize) -> Vec<NodeId> {
        let mut out = self.initial.clone();
        for s in self.stage_trace.iter().take(stage) {
            out.extend_from_slice(s);
        }
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicates)`.
    pub stderr: f64,
    pub replicates: u64,
    pub master_seed: u64,
}

impl SpreadEstimate {
    /// Summarises per-replicate values, summed in index order.
    pub fn from_samples(samples: &[f64], master_seed: u64) -> Self {
        let r = samples.len();
        assert!(r >= 1, "at least one replicate");
        let mean = samples.iter().sum::<f64>() / r as f64;
        let stderr = if r > 1 {
            let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
            (ss / (r - 1) as f64).sqrt() / (r as f64).sqrt()
        } else {
            0.0
        };
        SpreadEstimate {
            mean,
            stderr,
            replicates: r as u64,
            master_seed,
        }
    }

    /// A noiseless value, reported as a single replicate with zero error.
    pub fn exact(mean: f64) -> Self {
        SpreadEstimate {
            mean,
            stderr: 0.0,
            replicates: 1,
            master_seed: 0,
        }
    }
}
