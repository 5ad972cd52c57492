//! Layered DAG instances with fixed thresholds encoding independent set and
//! max coverage, plus the amplification that blows up the yes/no gap.

use super::ReductionError;
use crate::cascade::{
    run_cascade_realized, CascadeError, CascadeModel, InfluenceVector, Realization, ThresholdVector,
    TriggeringSampler, TriggeringSets,
};
use crate::graph::{DirectedGraph, GraphBuilder, NodeId};
use std::collections::BTreeSet;

/// A constructed instance: seeds of size `budget` drawn from the first layer,
/// with yes-instances reaching `target` under the fixed thresholds.
#[derive(Debug, Clone)]
pub struct HardnessInstance {
    pub model: CascadeModel,
    pub thresholds: ThresholdVector,
    pub budget: usize,
    pub target: f64,
    /// Node ids per layer; `layers[0]` are the nodes that may be seeded.
    pub layers: Vec<Vec<NodeId>>,
    /// `source_of[v]` is the element of the source problem that node `v` stands for.
    pub source_of: Vec<Option<usize>>,
}

impl HardnessInstance {
    pub fn graph(&self) -> &DirectedGraph {
        self.model.graph()
    }

    /// Deterministic spread of seed set `seeds` under the fixed thresholds.
    pub fn spread(&self, seeds: &[NodeId]) -> Result<f64, CascadeError> {
        let zero = InfluenceVector::zeros(self.model.node_count());
        let draw = Realization::fixed(self.thresholds.clone());
        Ok(run_cascade_realized(&self.model, seeds, &zero, &draw)?.spread)
    }

    /// Source-problem solution encoded by a seed set (nodes without a preimage
    /// are skipped), sorted and deduplicated.
    pub fn decode(&self, seeds: &[NodeId]) -> Vec<usize> {
        let mut out: Vec<usize> = seeds
            .iter()
            .filter_map(|&v| self.source_of.get(v as usize).copied().flatten())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn normalise_edges(n: usize, edges: &[(usize, usize)]) -> Result<BTreeSet<(usize, usize)>, ReductionError> {
    let mut set = BTreeSet::new();
    for &(u, v) in edges {
        if u >= n || v >= n || u == v {
            return Err(ReductionError::InvalidParameter(format!(
                "edge ({u}, {v}) invalid for a simple graph on {n} nodes"
            )));
        }
        set.insert((u.min(v), u.max(v)));
    }
    Ok(set)
}

/// Independent set of size `k` in the undirected graph `(n, edges)`.
///
/// Layer 1 is `V(G)`. For every pair `u < v` (lexicographic order) an edge of `G`
/// gets one child fed by both endpoints, a non-edge gets two children with one
/// parent each. All weights and thresholds are 1/2, so a child fires as soon as
/// any parent does and `σ(S) = n|S| − |E(S)|`. Target: `k·n`.
pub fn reduce_independent_set(
    n: usize,
    edges: &[(usize, usize)],
    k: usize,
) -> Result<HardnessInstance, ReductionError> {
    if k == 0 || k > n {
        return Err(ReductionError::InvalidParameter(format!("need 0 < k <= n, got k = {k}, n = {n}")));
    }
    let edges = normalise_edges(n, edges)?;
    let pairs = n * (n - 1) / 2;
    let total = n + edges.len() + 2 * (pairs - edges.len());
    let mut builder = GraphBuilder::new(total);
    let mut next = n as NodeId;
    let mut second = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if edges.contains(&(u, v)) {
                builder.add_edge(u as NodeId, next, 0.5);
                builder.add_edge(v as NodeId, next, 0.5);
                second.push(next);
                next += 1;
            } else {
                for parent in [u, v] {
                    builder.add_edge(parent as NodeId, next, 0.5);
                    second.push(next);
                    next += 1;
                }
            }
        }
    }
    let graph = builder.build()?;
    let mut source_of = vec![None; total];
    for (v, slot) in source_of.iter_mut().enumerate().take(n) {
        *slot = Some(v);
    }
    Ok(HardnessInstance {
        model: CascadeModel::linear(graph)?,
        thresholds: ThresholdVector::fixed(vec![0.5; total])?,
        budget: k,
        target: (k * n) as f64,
        layers: vec![(0..n as NodeId).collect(), second],
        source_of,
    })
}

/// `⌈(2n²)^{1/δ}⌉`, the sink count that turns a yes/no gap into an `n^{1−ε}`
/// approximation gap. Fails once the value no longer fits in a `u64`.
pub fn amplification_sink_count(n: usize, delta: f64) -> Result<u64, ReductionError> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(ReductionError::InvalidParameter(format!("exponent must be positive, got {delta}")));
    }
    let base = 2.0 * (n as f64) * (n as f64);
    let log2 = base.log2() / delta;
    if !log2.is_finite() || log2 >= 64.0 {
        return Err(ReductionError::TooLarge(format!(
            "(2·{n}²)^(1/{delta}) ≈ 2^{log2:.1} sinks; pass an explicit sink count instead"
        )));
    }
    let value = base.powf(1.0 / delta).ceil();
    if value >= u64::MAX as f64 {
        return Err(ReductionError::TooLarge(format!("(2·{n}²)^(1/{delta}) overflows")));
    }
    Ok(value as u64)
}

/// Appends `sinks` new nodes, each fed by every node of `inst` with weight `1/n`
/// and with fixed threshold `T/n`, so a sink fires iff at least `T` of the
/// original nodes are active. `T` must be an integer with `k < T <= n`.
pub fn amplify_instance(inst: &HardnessInstance, target: f64, sinks: usize) -> Result<HardnessInstance, ReductionError> {
    let g = inst.graph();
    let n = g.node_count();
    let k = inst.budget;
    if target.fract() != 0.0 || (k as f64) >= target || target > n as f64 || k == 0 {
        return Err(ReductionError::InvalidParameter(format!(
            "need integral T with 0 < k < T <= n, got k = {k}, T = {target}, n = {n}"
        )));
    }
    let total = n
        .checked_add(sinks)
        .filter(|&t| t <= NodeId::MAX as usize)
        .ok_or_else(|| ReductionError::TooLarge(format!("{sinks} sinks")))?;
    let w = 1.0 / n as f64;
    // The threshold is the running sum of T copies of w, the same float a sink
    // accumulates after T active parents, so "≥" holds exactly at T parents. The
    // engine caps influence at one, and so must the threshold.
    let mut threshold: f64 = 0.0;
    for _ in 0..target as usize {
        threshold += w;
    }
    let threshold = threshold.min(1.0);

    let mut builder = GraphBuilder::new(total);
    for e in g.edges() {
        builder.add_edge(e.source, e.target, e.weight);
    }
    for s in n..total {
        for u in 0..n {
            builder.add_edge(u as NodeId, s as NodeId, w);
        }
    }
    let graph = builder.build()?;
    let mut thresholds = inst.thresholds.values().to_vec();
    thresholds.resize(total, threshold);
    let mut source_of = inst.source_of.clone();
    source_of.resize(total, None);
    let mut layers = inst.layers.clone();
    layers.push((n as NodeId..total as NodeId).collect());

    // The sinks' in-weight is exactly one, so the linear contract still holds if
    // it did before; otherwise fall back to the capped evaluation.
    let model = CascadeModel::linear(graph.clone()).unwrap_or_else(|_| CascadeModel::linear_clamped(graph));
    Ok(HardnessInstance {
        model,
        thresholds: ThresholdVector::fixed(thresholds)?,
        budget: k,
        target: target + sinks as f64,
        layers,
        source_of,
    })
}

/// Max coverage with sets `sets` over elements `0..n`: set `j` becomes node `j`,
/// element `i` becomes `copies` nodes `m + i·copies + c`, each with triggering set
/// equal to the sets containing `i`. All weights and thresholds are 1, so
/// `σ(W) = |W| + copies·|∪_{j∈W} S_j|` for `W` in the first layer.
///
/// With `or_tree`, an element's parents are first merged pairwise through gate
/// nodes (ids after all copies) until at most two remain, so no triggering set
/// has more than two members. Active gates then add to the spread, by at most
/// the total gate count.
pub fn reduce_max_coverage(
    sets: &[Vec<usize>],
    n: usize,
    k: usize,
    copies: usize,
    or_tree: bool,
) -> Result<HardnessInstance, ReductionError> {
    let m = sets.len();
    if k > m || copies == 0 {
        return Err(ReductionError::InvalidParameter(format!(
            "need k <= m and at least one copy, got k = {k}, m = {m}, copies = {copies}"
        )));
    }
    let mut parents: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (j, set) in sets.iter().enumerate() {
        let unique: BTreeSet<usize> = set.iter().copied().collect();
        for i in unique {
            if i >= n {
                return Err(ReductionError::InvalidParameter(format!("set {j} contains {i}, universe is 0..{n}")));
            }
            parents[i].push(j as NodeId);
        }
    }

    let first_gate = m + n * copies;
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut gate_layers: Vec<Vec<NodeId>> = Vec::new();
    let mut next_gate = first_gate as NodeId;
    let mut element_inputs = Vec::with_capacity(n);
    for mut frontier in parents {
        let mut depth = 0;
        while or_tree && frontier.len() > 2 {
            let mut merged = Vec::with_capacity(frontier.len().div_ceil(2));
            for chunk in frontier.chunks(2) {
                if let [a, b] = *chunk {
                    arcs.push((a, next_gate));
                    arcs.push((b, next_gate));
                    if gate_layers.len() <= depth {
                        gate_layers.push(Vec::new());
                    }
                    gate_layers[depth].push(next_gate);
                    merged.push(next_gate);
                    next_gate += 1;
                } else {
                    merged.push(chunk[0]);
                }
            }
            frontier = merged;
            depth += 1;
        }
        element_inputs.push(frontier);
    }
    let total = next_gate as usize;
    for (i, inputs) in element_inputs.iter().enumerate() {
        for c in 0..copies {
            let copy = (m + i * copies + c) as NodeId;
            arcs.extend(inputs.iter().map(|&p| (p, copy)));
        }
    }

    let graph = DirectedGraph::from_arcs(total, arcs.iter().map(|&(u, v)| (u, v, 1.0)))?;
    let triggering = TriggeringSets::new(graph.nodes().map(|v| graph.in_sources(v).to_vec()).collect());
    let model = CascadeModel::triggering(graph, TriggeringSampler::Deterministic(triggering))?;

    let mut layers = vec![(0..m as NodeId).collect::<Vec<_>>()];
    layers.extend(gate_layers);
    layers.push((m as NodeId..first_gate as NodeId).collect());
    let mut source_of = vec![None; total];
    for (j, slot) in source_of.iter_mut().enumerate().take(m) {
        *slot = Some(j);
    }
    Ok(HardnessInstance {
        model,
        thresholds: ThresholdVector::fixed(vec![1.0; total])?,
        budget: k,
        target: (k + copies * n) as f64,
        layers,
        source_of,
    })
}
