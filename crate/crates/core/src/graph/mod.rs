//! Weighted digraphs in compressed adjacency form.
//!
//! A [`DirectedGraph`] keeps both orientations: the out-adjacency drives cascade
//! propagation and the in-adjacency is what influence functions sum over. Both are
//! built once from a canonical arc list and never mutated afterwards, so a graph can
//! be shared freely between Monte-Carlo workers.

mod generators;
mod io;
mod weights;

pub use generators::{grid_2d, preferential_attachment, random_dag};
pub use io::{load_edge_list, parse_edge_list, write_edge_list};
pub use weights::{assign_weights, WeightModel, TRIVALENCY_LEVELS};

use indexmap::IndexMap;
use std::collections::VecDeque;
use thiserror::Error;

pub type NodeId = u32;

/// Slack allowed when checking that in-weights sum to at most one.
pub const LINEAR_CONTRACT_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: edge weight {weight} outside [0, 1]")]
    WeightOutOfRange { line: usize, weight: f64 },
    #[error("edge {from}->{target}: weight {weight} outside [0, 1]")]
    InvalidWeight {
        from: NodeId,
        target: NodeId,
        weight: f64,
    },
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: u64, node_count: usize },
    #[error("node {node} has total in-weight {total} > 1")]
    ContractViolation { node: NodeId, total: f64 },
    #[error("graph is not a DAG (cycle through {cycle:?})")]
    NotADag { cycle: Vec<NodeId> },
    #[error("weight model `file` requires weights in the input edge list")]
    MissingWeights,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
}

/// Result of [`DirectedGraph::topological_order`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Order(Vec<NodeId>),
    /// Nodes of one directed cycle, in arc order.
    Cycle(Vec<NodeId>),
}

#[derive(Debug, Clone)]
pub struct DirectedGraph {
    node_count: usize,
    directed: bool,
    edges: Vec<Edge>,
    labels: Vec<u64>,
    weights_from_input: bool,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_weights: Vec<f64>,
}

impl PartialEq for DirectedGraph {
    // Adjacency arrays are derived from `edges`; provenance of weights is metadata.
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count
            && self.directed == other.directed
            && self.labels == other.labels
            && self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                a.source == b.source
                    && a.target == b.target
                    && a.weight.to_bits() == b.weight.to_bits()
            })
    }
}

/// Incremental construction of a [`DirectedGraph`].
///
/// Self-loops are dropped and a repeated arc keeps the last weight given (at the
/// position of its first appearance). In undirected mode every `add_edge` call
/// inserts both orientations.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    node_count: usize,
    directed: bool,
    arcs: IndexMap<(NodeId, NodeId), f64>,
    labels: Option<Vec<u64>>,
    weights_from_input: bool,
}

impl GraphBuilder {
    pub fn new(node_count: usize) -> Self {
        GraphBuilder {
            node_count,
            directed: true,
            arcs: IndexMap::new(),
            labels: None,
            weights_from_input: true,
        }
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    pub fn labels(mut self, labels: Vec<u64>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub(crate) fn weights_from_input(mut self, present: bool) -> Self {
        self.weights_from_input = present;
        self
    }

    pub fn add_edge(&mut self, source: NodeId, target: NodeId, weight: f64) -> &mut Self {
        if source != target {
            self.arcs.insert((source, target), weight);
            if !self.directed {
                self.arcs.insert((target, source), weight);
            }
        }
        self
    }

    pub fn build(self) -> Result<DirectedGraph, GraphError> {
        let edges = self
            .arcs
            .into_iter()
            .map(|((source, target), weight)| Edge {
                source,
                target,
                weight,
            })
            .collect();
        let labels = self
            .labels
            .unwrap_or_else(|| (0..self.node_count as u64).collect());
        DirectedGraph::from_parts(
            self.node_count,
            self.directed,
            edges,
            labels,
            self.weights_from_input,
        )
    }
}

impl DirectedGraph {
    /// Builds a directed graph from `(source, target, weight)` arcs.
    pub fn from_arcs<I>(node_count: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut builder = GraphBuilder::new(node_count);
        for (u, v, w) in arcs {
            builder.add_edge(u, v, w);
        }
        builder.build()
    }

    fn from_parts(
        node_count: usize,
        directed: bool,
        edges: Vec<Edge>,
        labels: Vec<u64>,
        weights_from_input: bool,
    ) -> Result<Self, GraphError> {
        assert_eq!(labels.len(), node_count, "one label per node");
        for e in &edges {
            for node in [e.source, e.target] {
                if node as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange {
                        node: node as u64,
                        node_count,
                    });
                }
            }
            if !(0.0..=1.0).contains(&e.weight) {
                return Err(GraphError::InvalidWeight {
                    from: e.source,
                    target: e.target,
                    weight: e.weight,
                });
            }
        }

        let (out_offsets, out_targets, out_weights) =
            compress(node_count, &edges, |e| (e.source, e.target));
        let (in_offsets, in_sources, in_weights) =
            compress(node_count, &edges, |e| (e.target, e.source));

        Ok(DirectedGraph {
            node_count,
            directed,
            edges,
            labels,
            weights_from_input,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
        })
    }

    /// Same topology, new weights (one per entry of [`edges`](Self::edges)).
    pub(crate) fn reweighted(&self, weights: &[f64]) -> Result<Self, GraphError> {
        assert_eq!(weights.len(), self.edges.len());
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &weight)| Edge { weight, ..*e })
            .collect();
        Self::from_parts(self.node_count, self.directed, edges, self.labels.clone(), true)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of stored arcs; an undirected edge counts twice.
    pub fn arc_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Whether the weights were supplied by the input rather than defaulted.
    pub fn has_input_weights(&self) -> bool {
        self.weights_from_input
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Original node id of dense node `v`.
    pub fn label(&self, v: NodeId) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn out_targets(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn out_weights(&self, v: NodeId) -> &[f64] {
        let v = v as usize;
        &self.out_weights[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_sources(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_weights(&self, v: NodeId) -> &[f64] {
        let v = v as usize;
        &self.in_weights[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    pub fn in_weight_sum(&self, v: NodeId) -> f64 {
        self.in_weights(v).iter().sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.node_count as NodeId
    }

    /// Checks `Σ_u w_uv ≤ 1` (up to [`LINEAR_CONTRACT_SLACK`]) at every node.
    pub fn check_linear_contract(&self) -> Result<(), GraphError> {
        for v in self.nodes() {
            let total = self.in_weight_sum(v);
            if total > 1.0 + LINEAR_CONTRACT_SLACK {
                return Err(GraphError::ContractViolation { node: v, total });
            }
        }
        Ok(())
    }

    /// Kahn's algorithm; sources are released in id order.
    pub fn topological_order(&self) -> Topology {
        let mut indegree: Vec<usize> = self.nodes().map(|v| self.in_degree(v)).collect();
        let mut queue: VecDeque<NodeId> = self.nodes().filter(|&v| indegree[v as usize] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in self.out_targets(u) {
                indegree[v as usize] -= 1;
                if indegree[v as usize] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if order.len() == self.node_count {
            return Topology::Order(order);
        }

        // Every node left over has an unprocessed in-neighbour; walking backwards
        // through those must eventually revisit a node.
        let start = indegree.iter().position(|&d| d > 0).expect("leftover node") as NodeId;
        let mut seen_at = vec![usize::MAX; self.node_count];
        let mut walk = Vec::new();
        let mut cur = start;
        while seen_at[cur as usize] == usize::MAX {
            seen_at[cur as usize] = walk.len();
            walk.push(cur);
            cur = *self
                .in_sources(cur)
                .iter()
                .find(|&&u| indegree[u as usize] > 0)
                .expect("leftover node has a leftover predecessor");
        }
        let mut cycle = walk.split_off(seen_at[cur as usize]);
        cycle.reverse();
        Topology::Cycle(cycle)
    }

    /// Topological order, or [`GraphError::NotADag`].
    pub fn dag_order(&self) -> Result<Vec<NodeId>, GraphError> {
        match self.topological_order() {
            Topology::Order(order) => Ok(order),
            Topology::Cycle(cycle) => Err(GraphError::NotADag { cycle }),
        }
    }

    /// Nodes reachable from `v` by a path with at least one arc.
    pub fn descendants(&self, v: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack: Vec<NodeId> = self.out_targets(v).to_vec();
        while let Some(u) = stack.pop() {
            if !std::mem::replace(&mut seen[u as usize], true) {
                stack.extend_from_slice(self.out_targets(u));
            }
        }
        seen
    }

    /// Nodes that reach `v` by a path with at least one arc.
    pub fn ancestors(&self, v: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack: Vec<NodeId> = self.in_sources(v).to_vec();
        while let Some(u) = stack.pop() {
            if !std::mem::replace(&mut seen[u as usize], true) {
                stack.extend_from_slice(self.in_sources(u));
            }
        }
        seen
    }
}

type Compressed = (Vec<usize>, Vec<NodeId>, Vec<f64>);

fn compress(node_count: usize, edges: &[Edge], key: impl Fn(&Edge) -> (NodeId, NodeId)) -> Compressed {
    let mut offsets = vec![0usize; node_count + 1];
    for e in edges {
        offsets[key(e).0 as usize + 1] += 1;
    }
    for i in 0..node_count {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut nbrs = vec![0; edges.len()];
    let mut weights = vec![0.0; edges.len()];
    for e in edges {
        let (row, col) = key(e);
        let slot = cursor[row as usize];
        nbrs[slot] = col;
        weights[slot] = e.weight;
        cursor[row as usize] += 1;
    }
    (offsets, nbrs, weights)
}
