//! Fractional to integral: every node `v` gets `N = 1/δ` activator nodes, each a
//! source with a single arc of weight `δ` into `v` and zero objective weight.
//! Seeding the first `x_v/δ` activators of `v` applies exactly `x_v` of direct
//! influence to `v` in stage 1, so the integral run on the reduced graph tracks
//! the fractional run on the original one stage for stage.

use super::{GridStep, ReductionError};
use crate::cascade::{CascadeModel, InfluenceVector};
use crate::graph::{DirectedGraph, GraphBuilder, NodeId};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ReducedInstance {
    base_graph: Arc<DirectedGraph>,
    grid: GridStep,
    model: CascadeModel,
}

/// Builds the reduced instance for grid step `grid`. Activator `i` of node `v`
/// (`i` counted from zero) has id `n + v·N + i`.
pub fn reduce_fractional_to_integral(g: &DirectedGraph, grid: GridStep) -> Result<ReducedInstance, ReductionError> {
    g.check_linear_contract()?;
    let n = g.node_count();
    let per_node = grid.steps() as usize;
    let total = n
        .checked_mul(per_node)
        .and_then(|a| a.checked_add(n))
        .filter(|&t| t <= NodeId::MAX as usize)
        .ok_or_else(|| ReductionError::TooLarge(format!("{n} nodes with {per_node} activators each")))?;

    let mut builder = GraphBuilder::new(total).labels((0..total as u64).collect());
    for e in g.edges() {
        builder.add_edge(e.source, e.target, e.weight);
    }
    let delta = grid.delta();
    for v in 0..n {
        for i in 0..per_node {
            builder.add_edge((n + v * per_node + i) as NodeId, v as NodeId, delta);
        }
    }
    let reduced = builder.build()?;
    Ok(ReducedInstance {
        base_graph: Arc::new(g.clone()),
        grid,
        model: CascadeModel::capped_with_activators(reduced, n, delta),
    })
}

impl ReducedInstance {
    pub fn base_graph(&self) -> &DirectedGraph {
        &self.base_graph
    }

    pub fn grid(&self) -> GridStep {
        self.grid
    }

    /// The reduced model; its objective counts only the original nodes.
    pub fn model(&self) -> &CascadeModel {
        &self.model
    }

    pub fn base_nodes(&self) -> usize {
        self.base_graph.node_count()
    }

    /// `A_v`.
    pub fn activators(&self, v: NodeId) -> std::ops::Range<NodeId> {
        let n = self.base_nodes() as NodeId;
        let per_node = self.grid.steps();
        let first = n + v * per_node;
        first..first + per_node
    }

    /// The seed set `Ŝ^x`: the first `x_v/δ` activators of every node.
    pub fn map_allocation(&self, x: &InfluenceVector) -> Result<Vec<NodeId>, ReductionError> {
        if x.len() != self.base_nodes() {
            return Err(ReductionError::InvalidParameter(format!(
                "allocation has {} entries, graph has {} nodes",
                x.len(),
                self.base_nodes()
            )));
        }
        let mut seeds = Vec::new();
        for v in 0..self.base_nodes() as NodeId {
            let value = x.get(v);
            let k = self.grid.units(value).ok_or(ReductionError::OffGrid { node: v, value })?;
            seeds.extend(self.activators(v).take(k as usize));
        }
        Ok(seeds)
    }
}
