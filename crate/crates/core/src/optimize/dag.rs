//! Linear-threshold spread on DAGs.
//!
//! With uniform thresholds and `Σ_u w_uv ≤ 1`, a single active source `v`
//! activates `u` with probability `p(u) = Σ_z w_zu p(z)` (live-edge argument:
//! each node keeps at most one incoming arc). When no influenced node can reach
//! a saturated one, spread is linear in the allocation:
//! `σ(x) = Σ_v x_v σ(1_v)`.

use super::{check_budget, AllocationResult, OptimizeError, Spend};
use crate::cascade::{InfluenceVector, SpreadEstimate};
use crate::graph::{DirectedGraph, NodeId, LINEAR_CONTRACT_SLACK};

/// `σ(1_v)` by forward propagation from `v` in topological order.
pub fn dag_single_node_spread(g: &DirectedGraph, v: NodeId) -> Result<f64, OptimizeError> {
    g.check_linear_contract()?;
    let order = g.dag_order()?;
    if v as usize >= g.node_count() {
        return Err(crate::cascade::CascadeError::UnknownNode(v).into());
    }
    let mut p = vec![0.0; g.node_count()];
    p[v as usize] = 1.0;
    let start = order.iter().position(|&u| u == v).expect("every node is ordered");
    for &u in &order[start + 1..] {
        p[u as usize] = g
            .in_sources(u)
            .iter()
            .zip(g.in_weights(u))
            .map(|(&z, &w)| w * p[z as usize])
            .sum();
    }
    Ok(p.iter().sum())
}

/// `σ(1_v)` for every node at once: `σ(1_v) = 1 + Σ_{u∈δ⁺(v)} w_vu σ(1_u)`,
/// evaluated in reverse topological order.
pub fn dag_single_node_spreads(g: &DirectedGraph) -> Result<Vec<f64>, OptimizeError> {
    g.check_linear_contract()?;
    let order = g.dag_order()?;
    let mut sigma = vec![0.0; g.node_count()];
    for &v in order.iter().rev() {
        sigma[v as usize] = 1.0
            + g.out_targets(v)
                .iter()
                .zip(g.out_weights(v))
                .map(|(&u, &w)| w * sigma[u as usize])
                .sum::<f64>();
    }
    Ok(sigma)
}

/// `I(x)` (positive allocation) and `S(x)` (allocation plus in-weight above one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationSets {
    pub influenced: Vec<NodeId>,
    pub saturated: Vec<NodeId>,
}

impl SaturationSets {
    pub fn of(g: &DirectedGraph, x: &InfluenceVector) -> Self {
        let influenced = g.nodes().filter(|&v| x.get(v) > 0.0).collect();
        let saturated = g.nodes().filter(|&v| saturates(g, v, x.get(v))).collect();
        SaturationSets { influenced, saturated }
    }

    /// True when no path of one or more arcs leads from `I(x)` to `S(x)`, the
    /// condition under which spread is linear.
    pub fn linear_regime(&self, g: &DirectedGraph) -> bool {
        let mut target = vec![false; g.node_count()];
        for &s in &self.saturated {
            target[s as usize] = true;
        }
        self.influenced
            .iter()
            .all(|&v| !g.descendants(v).iter().zip(&target).any(|(&d, &t)| d && t))
    }
}

fn saturates(g: &DirectedGraph, v: NodeId, amount: f64) -> bool {
    amount + g.in_weight_sum(v) > 1.0 + LINEAR_CONTRACT_SLACK
}

/// Fills nodes in decreasing `σ(1_v)` (ties to the lower id), giving each as
/// much of the remaining budget as keeps the linear regime: nothing goes to a
/// node that reaches a saturated node, and a node with an influenced ancestor
/// is filled only up to `1 − Σ_u w_uv`. The estimate is the predicted spread
/// `Σ_v x_v σ(1_v)`, exact in the linear regime.
pub fn dag_linear_optimize(g: &DirectedGraph, budget: f64) -> Result<AllocationResult, OptimizeError> {
    check_budget(budget, g.node_count())?;
    let sigma = dag_single_node_spreads(g)?;
    let n = g.node_count();
    let mut order: Vec<NodeId> = g.nodes().collect();
    order.sort_by(|&a, &b| sigma[b as usize].total_cmp(&sigma[a as usize]).then(a.cmp(&b)));

    let mut influenced = vec![false; n];
    let mut saturated = vec![false; n];
    let mut remaining = budget;
    let mut log = Vec::new();
    let mut predicted = 0.0;
    for v in order {
        if remaining <= 1e-12 {
            break;
        }
        let reaches_saturated = g.descendants(v).iter().zip(&saturated).any(|(&d, &s)| d && s);
        if reaches_saturated {
            continue;
        }
        let mut amount = remaining.min(1.0);
        if saturates(g, v, amount) {
            let fed = g.ancestors(v).iter().zip(&influenced).any(|(&a, &i)| a && i);
            if fed {
                amount = amount.min((1.0 - g.in_weight_sum(v)).max(0.0));
            }
        }
        if amount <= 0.0 {
            continue;
        }
        influenced[v as usize] = true;
        saturated[v as usize] = saturates(g, v, amount);
        remaining -= amount;
        predicted += amount * sigma[v as usize];
        log.push(Spend { node: v, amount });
    }
    let mut result = AllocationResult::from_log(n, log)?;
    result.estimated_spread = Some(SpreadEstimate::exact(predicted));
    Ok(result)
}
