//! Exact expected spread for small instances with uniform thresholds.
//!
//! The cascade only ever compares `τ_v` against influence levels drawn from the
//! finite set of breakpoints `{min(x_v + Σ_{u∈A} w_uv, 1) : A ⊆ δ⁻(v)}`, so the
//! final active set is constant on each cell of the product of per-node breakpoint
//! intervals. Rather than enumerating the full product, the evaluation runs the
//! cascade one node at a time and splits on `τ_v` only when a comparison is
//! actually made: each node carries the interval `(lo_v, 1]` its threshold is known
//! to lie in, and the question `τ_v ≤ L` splits that interval with conditional
//! probability `(L − lo_v) / (1 − lo_v)`. The leaves of this decision tree are
//! unions of cells, and their probabilities are exact.

use super::{CascadeError, CascadeModel, InfluenceKind, InfluenceVector, TriggeringSampler, TriggeringSets};
use crate::graph::{DirectedGraph, NodeId};

/// Largest number of nodes that can receive influence (seeds excluded).
pub const EXACT_MAX_CONTESTED: usize = 10;
/// Largest number of distinct breakpoints per node.
pub const EXACT_MAX_BREAKPOINTS: usize = 64;

/// Exact `σ(x)` for a fractional allocation.
pub fn exact_spread_small(model: &CascadeModel, x: &InfluenceVector) -> Result<f64, CascadeError> {
    if x.len() != model.node_count() {
        return Err(CascadeError::SizeMismatch {
            what: "influence vector",
            got: x.len(),
            expected: model.node_count(),
        });
    }
    exact_spread(model, &[], x.values())
}

/// Exact spread of seed set `seeds` under integral semantics.
pub fn exact_spread_of_set_small(model: &CascadeModel, seeds: &[NodeId]) -> Result<f64, CascadeError> {
    exact_spread(model, seeds, &[])
}

fn exact_spread(model: &CascadeModel, seeds: &[NodeId], x: &[f64]) -> Result<f64, CascadeError> {
    let graph = model.graph();
    let n = graph.node_count();
    if n > 64 {
        return Err(CascadeError::TooLarge(format!("{n} nodes (at most 64)")));
    }
    let sets = match model.kind() {
        InfluenceKind::Triggering(TriggeringSampler::Deterministic(sets)) => Some(sets),
        InfluenceKind::Triggering(_) => return Err(CascadeError::Unsupported("random triggering sets")),
        _ => None,
    };
    let direct = |v: NodeId| if x.is_empty() { 0.0 } else { x[v as usize] };

    let mut seeded = 0u64;
    for &s in seeds {
        if s as usize >= n {
            return Err(CascadeError::UnknownNode(s));
        }
        seeded |= 1 << s;
    }
    let contested: Vec<NodeId> = graph
        .nodes()
        .filter(|&v| seeded >> v & 1 == 0 && (direct(v) > 0.0 || graph.in_degree(v) > 0))
        .collect();
    if contested.len() > EXACT_MAX_CONTESTED {
        return Err(CascadeError::TooLarge(format!(
            "{} nodes can receive influence (at most {EXACT_MAX_CONTESTED})",
            contested.len()
        )));
    }
    for &v in &contested {
        let count = breakpoint_count(graph, sets, v, direct(v));
        if count > EXACT_MAX_BREAKPOINTS {
            return Err(CascadeError::TooLarge(format!(
                "node {v} has more than {EXACT_MAX_BREAKPOINTS} breakpoints"
            )));
        }
    }

    let counted_mask = match model.objective_nodes() {
        64 => u64::MAX,
        k => (1u64 << k) - 1,
    };
    let tree = DecisionTree {
        graph,
        sets,
        x,
        contested,
        counted_mask,
    };
    let mut floor = vec![0.0; n];
    Ok(tree.expected(seeded, &mut floor))
}

fn breakpoint_count(graph: &DirectedGraph, sets: Option<&TriggeringSets>, v: NodeId, x_v: f64) -> usize {
    if sets.is_some() {
        return if x_v >= 1.0 { 1 } else { 2 };
    }
    let mut levels = vec![x_v.min(1.0)];
    for &w in graph.in_weights(v) {
        let extended: Vec<f64> = levels.iter().map(|&l| (l + w).min(1.0)).collect();
        levels.extend(extended);
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        if levels.len() > EXACT_MAX_BREAKPOINTS {
            break;
        }
    }
    levels.len()
}

struct DecisionTree<'a> {
    graph: &'a DirectedGraph,
    sets: Option<&'a TriggeringSets>,
    x: &'a [f64],
    contested: Vec<NodeId>,
    counted_mask: u64,
}

impl DecisionTree<'_> {
    fn level(&self, v: NodeId, active: u64) -> f64 {
        let received = match self.sets {
            Some(sets) => {
                if sets.set(v).iter().any(|&u| active >> u & 1 == 1) {
                    1.0
                } else {
                    0.0
                }
            }
            None => {
                let mut sum = 0.0;
                for (&u, &w) in self.graph.in_sources(v).iter().zip(self.graph.in_weights(v)) {
                    if active >> u & 1 == 1 {
                        sum += w;
                    }
                }
                sum
            }
        };
        let direct = if self.x.is_empty() { 0.0 } else { self.x[v as usize] };
        (received + direct).min(1.0)
    }

    /// Expected objective given the active set and `τ_v > floor[v]` for every
    /// inactive node.
    fn expected(&self, active: u64, floor: &mut [f64]) -> f64 {
        for &v in &self.contested {
            if active >> v & 1 == 1 {
                continue;
            }
            let level = self.level(v, active);
            let lo = floor[v as usize];
            if level > lo {
                let p = (level - lo) / (1.0 - lo);
                let mut total = p * self.expected(active | 1 << v, floor);
                if p < 1.0 {
                    floor[v as usize] = level;
                    total += (1.0 - p) * self.expected(active, floor);
                    floor[v as usize] = lo;
                }
                return total;
            }
        }
        (active & self.counted_mask).count_ones() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::estimate_spread;

    #[test]
    fn isolated_node() {
        let model = CascadeModel::linear(DirectedGraph::from_arcs(1, []).unwrap()).unwrap();
        let x = InfluenceVector::new(vec![0.3]).unwrap();
        assert!((exact_spread_small(&model, &x).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_node_chain() {
        let g = DirectedGraph::from_arcs(2, [(0, 1, 0.4)]).unwrap();
        let model = CascadeModel::linear(g).unwrap();
        let x = InfluenceVector::new(vec![1.0, 0.0]).unwrap();
        assert!((exact_spread_small(&model, &x).unwrap() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn three_cycle_with_half_influence() {
        // Each node: x = 0.5 plus in-weight 0.5 saturates, so one activation
        // cascades around: σ = 3 (1 - 0.5³).
        let g = DirectedGraph::from_arcs(3, [(0, 1, 0.5), (1, 2, 0.5), (2, 0, 0.5)]).unwrap();
        let model = CascadeModel::linear(g).unwrap();
        let x = InfluenceVector::uniform(3, 0.5).unwrap();
        assert!((exact_spread_small(&model, &x).unwrap() - 2.625).abs() < 1e-12);
    }

    /// Independent oracle: enumerate every cell of the product of per-node
    /// breakpoint intervals and run a deterministic cascade at its midpoint.
    fn cell_enumeration(model: &CascadeModel, x: &InfluenceVector) -> f64 {
        let g = model.graph();
        let n = g.node_count();
        let mut cuts: Vec<Vec<f64>> = Vec::new();
        for v in g.nodes() {
            let mut levels = vec![0.0, 1.0, x.get(v).min(1.0)];
            let ws = g.in_weights(v);
            for mask in 0u32..(1 << ws.len()) {
                let s: f64 = (0..ws.len()).filter(|i| mask >> i & 1 == 1).map(|i| ws[i]).sum();
                levels.push((x.get(v) + s).min(1.0));
            }
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            cuts.push(levels);
        }
        let mut idx = vec![0usize; n];
        let mut total = 0.0;
        loop {
            let mut vol = 1.0;
            let mut tau = vec![0.0; n];
            for v in 0..n {
                let (a, b) = (cuts[v][idx[v]], cuts[v][idx[v] + 1]);
                vol *= b - a;
                tau[v] = 0.5 * (a + b);
            }
            if vol > 0.0 {
                let t = crate::cascade::ThresholdVector::fixed(tau).unwrap();
                total += vol * crate::cascade::run_cascade(model, x, &t).unwrap().spread;
            }
            let mut k = 0;
            loop {
                if k == n {
                    return total;
                }
                idx[k] += 1;
                if idx[k] + 1 < cuts[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn agrees_with_cell_enumeration() {
        let g = DirectedGraph::from_arcs(
            4,
            [(0, 1, 0.3), (1, 2, 0.6), (2, 0, 0.2), (0, 3, 0.25), (2, 3, 0.35), (1, 0, 0.4)],
        )
        .unwrap();
        let model = CascadeModel::linear(g).unwrap();
        for x in [[0.1, 0.0, 0.2, 0.0], [0.5, 0.25, 0.0, 0.75], [1.0, 0.0, 0.0, 0.0]] {
            let x = InfluenceVector::new(x.to_vec()).unwrap();
            let tree = exact_spread_small(&model, &x).unwrap();
            let cells = cell_enumeration(&model, &x);
            assert!((tree - cells).abs() < 1e-9, "{tree} vs {cells}");
        }
    }

    #[test]
    fn agrees_with_monte_carlo() {
        let g = DirectedGraph::from_arcs(5, [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.3), (2, 3, 0.7), (3, 4, 0.2), (4, 0, 0.4)])
            .unwrap();
        let model = CascadeModel::linear(g).unwrap();
        let x = InfluenceVector::new(vec![0.3, 0.1, 0.0, 0.2, 0.4]).unwrap();
        let exact = exact_spread_small(&model, &x).unwrap();
        let est = estimate_spread(&model, &x, 200_000, 2).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn integral_star() {
        let g = DirectedGraph::from_arcs(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let model = CascadeModel::linear(g).unwrap();
        assert_eq!(exact_spread_of_set_small(&model, &[0]).unwrap(), 4.0);
        assert_eq!(exact_spread_of_set_small(&model, &[1]).unwrap(), 1.0);
    }

    #[test]
    fn too_large_instances_are_rejected() {
        let g = crate::graph::random_dag(12, 2, 1);
        let g = crate::graph::assign_weights(&g, crate::graph::WeightModel::WeightedCascade, 0).unwrap();
        let model = CascadeModel::linear(g).unwrap();
        let x = InfluenceVector::uniform(12, 0.1).unwrap();
        assert!(matches!(exact_spread_small(&model, &x), Err(CascadeError::TooLarge(_))));

        // Seven in-arcs with distinct weights give 128 breakpoints.
        let arcs = (0..7).map(|u| (u, 7, (1u32 << u) as f64 / 256.0));
        let model = CascadeModel::linear(DirectedGraph::from_arcs(8, arcs).unwrap()).unwrap();
        assert!(matches!(
            exact_spread_small(&model, &InfluenceVector::zeros(8)),
            Err(CascadeError::TooLarge(_))
        ));
    }

    #[test]
    fn random_triggering_is_unsupported() {
        let g = DirectedGraph::from_arcs(2, [(0, 1, 0.5)]).unwrap();
        let model = CascadeModel::triggering(g, TriggeringSampler::Independent).unwrap();
        assert!(matches!(
            exact_spread_of_set_small(&model, &[0]),
            Err(CascadeError::Unsupported(_))
        ));
    }
}
