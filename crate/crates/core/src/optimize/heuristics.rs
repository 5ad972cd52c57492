//! Fast allocation heuristics that look only at degrees and arc weights.

use super::{check_budget, integral_budget, AllocationResult, OptimizeError, Spend};
use crate::graph::{DirectedGraph, NodeId};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

/// Budget below this counts as spent.
const BUDGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heuristic {
    /// The `B` nodes of largest out-degree.
    DegreeInt,
    /// Largest out-degree, then every in-neighbour of the pick loses one degree.
    DiscountInt,
    /// `B` nodes uniformly without replacement.
    RandomInt,
    /// `x_v = min(1, B·d_out(v)/m)`, leftover redistributed by degree.
    DegreeFrac,
    /// Repeatedly pick the node with the most out-weight into unselected nodes and
    /// pay what its selected in-neighbours do not already cover.
    DiscountFrac,
    /// `x_v = B/n`.
    UniformFrac,
}

impl Heuristic {
    pub const ALL: [Heuristic; 6] = [
        Heuristic::DegreeInt,
        Heuristic::DiscountInt,
        Heuristic::RandomInt,
        Heuristic::DegreeFrac,
        Heuristic::DiscountFrac,
        Heuristic::UniformFrac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::DegreeInt => "DegreeInt",
            Heuristic::DiscountInt => "DiscountInt",
            Heuristic::RandomInt => "RandomInt",
            Heuristic::DegreeFrac => "DegreeFrac",
            Heuristic::DiscountFrac => "DiscountFrac",
            Heuristic::UniformFrac => "UniformFrac",
        }
    }

    pub fn is_fractional(self) -> bool {
        matches!(self, Heuristic::DegreeFrac | Heuristic::DiscountFrac | Heuristic::UniformFrac)
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| OptimizeError::UnknownAlgorithm(s.to_string()))
    }
}

/// Runs `heuristic` with budget `budget`; integral heuristics need an integral
/// budget. `seed` only matters for [`Heuristic::RandomInt`].
pub fn heuristic_allocate(
    heuristic: Heuristic,
    g: &DirectedGraph,
    budget: f64,
    seed: u64,
) -> Result<AllocationResult, OptimizeError> {
    let n = g.node_count();
    let log = match heuristic {
        Heuristic::DegreeInt => unit_spends(degree_int(g, integral_budget(budget, n)?)),
        Heuristic::DiscountInt => unit_spends(discount_int(g, integral_budget(budget, n)?)),
        Heuristic::RandomInt => {
            let k = integral_budget(budget, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            unit_spends(sample(&mut rng, n, k).into_iter().map(|v| v as NodeId).collect())
        }
        Heuristic::UniformFrac => {
            check_budget(budget, n)?;
            if budget == 0.0 || n == 0 {
                Vec::new()
            } else {
                let share = (budget / n as f64).min(1.0);
                (0..n as NodeId).map(|node| Spend { node, amount: share }).collect()
            }
        }
        Heuristic::DegreeFrac => {
            check_budget(budget, n)?;
            degree_frac(g, budget)
        }
        Heuristic::DiscountFrac => {
            check_budget(budget, n)?;
            discount_frac(g, budget)
        }
    };
    AllocationResult::from_log(n, log)
}

fn unit_spends(nodes: Vec<NodeId>) -> Vec<Spend> {
    nodes.into_iter().map(|node| Spend { node, amount: 1.0 }).collect()
}

fn degree_int(g: &DirectedGraph, k: usize) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.sort_by_key(|&v| (Reverse(g.out_degree(v)), v));
    nodes.truncate(k);
    nodes
}

fn discount_int(g: &DirectedGraph, k: usize) -> Vec<NodeId> {
    let n = g.node_count();
    let mut degree: Vec<usize> = g.nodes().map(|v| g.out_degree(v)).collect();
    let mut chosen = vec![false; n];
    let mut heap: BinaryHeap<(usize, Reverse<NodeId>)> = g.nodes().map(|v| (degree[v as usize], Reverse(v))).collect();
    let mut picks = Vec::with_capacity(k);
    while picks.len() < k {
        let Some((d, Reverse(u))) = heap.pop() else { break };
        if chosen[u as usize] || d != degree[u as usize] {
            continue;
        }
        chosen[u as usize] = true;
        picks.push(u);
        // An in-neighbour's arc into u no longer reaches anyone new.
        for &w in g.in_sources(u) {
            if !chosen[w as usize] {
                degree[w as usize] -= 1;
                heap.push((degree[w as usize], Reverse(w)));
            }
        }
    }
    picks
}

fn degree_frac(g: &DirectedGraph, budget: f64) -> Vec<Spend> {
    let n = g.node_count();
    let mut x = vec![0.0; n];
    let mut remaining = budget;
    // Water-filling: hand out the remaining budget in proportion to out-degree
    // among nodes below the cap, cap, and repeat with whatever was cut off. The
    // second pass spreads anything left evenly over the zero-degree nodes.
    for pass in 0..2 {
        let weight = |v: usize| if pass == 0 { g.out_degree(v as NodeId) as f64 } else { 1.0 };
        loop {
            let open: Vec<usize> = (0..n).filter(|&v| x[v] < 1.0 && weight(v) > 0.0).collect();
            if remaining <= BUDGET_SLACK || open.is_empty() {
                break;
            }
            let total: f64 = open.iter().map(|&v| weight(v)).sum();
            let mut spent = 0.0;
            for &v in &open {
                let add = (remaining * weight(v) / total).min(1.0 - x[v]);
                x[v] += add;
                spent += add;
            }
            remaining -= spent;
            if open.iter().all(|&v| x[v] < 1.0) {
                break;
            }
        }
    }
    (0..n as NodeId)
        .filter(|&v| x[v as usize] > 0.0)
        .map(|node| Spend {
            node,
            amount: x[node as usize],
        })
        .collect()
}

fn discount_frac(g: &DirectedGraph, budget: f64) -> Vec<Spend> {
    let n = g.node_count();
    // Γ⁻_v(V − S): out-weight of v into unselected nodes.
    let mut out_open: Vec<f64> = g.nodes().map(|v| g.out_weights(v).iter().sum()).collect();
    // Γ⁺_v(S): in-weight of v from selected nodes.
    let mut in_selected = vec![0.0f64; n];
    let mut selected = vec![false; n];
    let mut version = vec![0u32; n];
    let mut heap: BinaryHeap<Candidate> = g
        .nodes()
        .map(|v| Candidate {
            score: out_open[v as usize],
            node: v,
            version: 0,
        })
        .collect();
    let mut b = budget;
    let mut log = Vec::new();
    while b > BUDGET_SLACK {
        let Some(c) = heap.pop() else { break };
        let u = c.node as usize;
        if selected[u] || c.version != version[u] {
            continue;
        }
        let spend = b.min((1.0 - in_selected[u]).max(0.0));
        log.push(Spend {
            node: c.node,
            amount: spend,
        });
        b -= spend;
        selected[u] = true;
        for (&w, &weight) in g.in_sources(c.node).iter().zip(g.in_weights(c.node)) {
            let wi = w as usize;
            if !selected[wi] {
                out_open[wi] -= weight;
                version[wi] += 1;
                heap.push(Candidate {
                    score: out_open[wi],
                    node: w,
                    version: version[wi],
                });
            }
        }
        for (&v, &weight) in g.out_targets(c.node).iter().zip(g.out_weights(c.node)) {
            in_selected[v as usize] += weight;
        }
    }
    log
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    node: NodeId,
    version: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    /// Higher score first, then lower id.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| self.version.cmp(&other.version))
    }
}
