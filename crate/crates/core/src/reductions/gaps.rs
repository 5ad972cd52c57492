//! Gap examples between fractional and integral influence.

use super::ReductionError;
use crate::cascade::{InfluenceVector, ThresholdVector};
use crate::graph::{DirectedGraph, NodeId};

/// Directed path `0 → 1 → … → n−1` with weights `1/(n+1)` and fixed thresholds
/// `2/(n+1)`. One unit of integral budget activates a single node, while the
/// witness allocation (same unit budget) activates the whole path.
#[derive(Debug, Clone)]
pub struct PathGap {
    pub graph: DirectedGraph,
    pub thresholds: ThresholdVector,
    /// `2/(n+1)` on the source, `1/(n+1)` elsewhere.
    pub witness: InfluenceVector,
}

pub fn make_path_gap(n: usize) -> Result<PathGap, ReductionError> {
    if n < 2 {
        return Err(ReductionError::InvalidParameter(format!("path gap needs n >= 2, got {n}")));
    }
    let unit = 1.0 / (n + 1) as f64;
    // 2·unit is exact, so the source's neighbour sees `unit + unit == threshold`.
    let threshold = 2.0 * unit;
    let graph = DirectedGraph::from_arcs(n, (1..n as NodeId).map(|v| (v - 1, v, unit)))?;
    let thresholds = ThresholdVector::fixed(vec![threshold; n])?;
    let mut witness = vec![unit; n];
    witness[0] = threshold;
    Ok(PathGap {
        graph,
        thresholds,
        witness: InfluenceVector::new(witness)?,
    })
}

/// One-directional cycle on `n` nodes with every weight `1 − K/n`; thresholds stay
/// uniform. Allocating `K/n` to every node saturates each node once its
/// predecessor is active.
pub fn make_cycle_gap(n: usize, budget: f64) -> Result<DirectedGraph, ReductionError> {
    if n < 2 {
        return Err(ReductionError::InvalidParameter(format!("cycle gap needs n >= 2, got {n}")));
    }
    if !(budget > 0.0 && budget <= n as f64) {
        return Err(ReductionError::InvalidParameter(format!(
            "cycle gap needs 0 < K <= n, got K = {budget}"
        )));
    }
    let w = 1.0 - budget / n as f64;
    Ok(DirectedGraph::from_arcs(
        n,
        (0..n as NodeId).map(|v| (v, (v + 1) % n as NodeId, w)),
    )?)
}
