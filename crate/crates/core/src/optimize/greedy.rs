//! Greedy over grid moves: each round adds one step `δ` to the coordinate with
//! the largest marginal gain (fractional), or one node to the seed set
//! (integral).
//!
//! Lazy evaluation keeps each candidate's last gain as an upper bound in a
//! max-heap and only re-evaluates candidates whose bound could still beat the
//! current leader. Candidates whose gains lie within the tie band of the leader
//! are all refreshed before committing. Under Monte Carlo the band is the
//! leader's standard error; a band with several members is settled by one
//! re-evaluation at twice the replicates. Remaining ties go to the lowest id.

use super::{integral_budget, AllocationResult, BudgetedProblem, Estimator, OptimizeError, Spend};
use crate::cascade::{
    exact_spread_of_set_small, exact_spread_small, replicate_spreads, run_cascade_realized, CascadeModel,
    InfluenceVector, Realization, SpreadEstimate,
};
use crate::graph::NodeId;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Gains closer than this are ties under noiseless estimators.
const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyMode {
    #[default]
    Lazy,
    /// Re-evaluates every candidate every round.
    Naive,
}

pub fn greedy_fractional(p: &BudgetedProblem, mode: GreedyMode) -> Result<AllocationResult, OptimizeError> {
    let steps = p.steps()?;
    let cap = p.grid.steps();
    run_greedy(p, steps, cap, mode)
}

/// Lazy greedy over seed sets with integral semantics; `p.grid` is ignored.
pub fn greedy_integral(p: &BudgetedProblem, mode: GreedyMode) -> Result<AllocationResult, OptimizeError> {
    let k = integral_budget(p.budget, p.model.node_count())?;
    run_greedy(p, k as u64, 0, mode)
}

/// `cap == 0` selects integral semantics (each node at most once, seeded at
/// stage 0); otherwise coordinates move in units of `1/cap` up to one.
fn run_greedy(p: &BudgetedProblem, steps: u64, cap: u32, mode: GreedyMode) -> Result<AllocationResult, OptimizeError> {
    let n = p.model.node_count();
    let oracle = Oracle {
        model: &p.model,
        estimator: &p.estimator,
        cap,
    };
    let limit = cap.max(1);
    let mut units = vec![0u32; n];
    let mut log = Vec::new();
    let mut heap: BinaryHeap<Entry> = (0..n as NodeId)
        .map(|node| Entry {
            bound: f64::INFINITY,
            stderr: 0.0,
            node,
            round: u64::MAX,
        })
        .collect();

    for round in 0..steps {
        let mut round_state = Round {
            oracle: &oracle,
            units: &units,
            base: [None, None],
        };
        let band = match mode {
            GreedyMode::Lazy => lazy_band(&mut heap, &mut round_state, round)?,
            GreedyMode::Naive => {
                heap = naive_entries(&heap, &mut round_state, round)?;
                let leader = *heap.peek().expect("non-empty");
                heap.iter().filter(|e| e.bound >= leader.bound - oracle.band(&leader)).copied().collect()
            }
        };
        if band.is_empty() {
            break;
        }
        let chosen = choose(&band, &mut round_state)?;
        units[chosen as usize] += 1;
        log.push(Spend {
            node: chosen,
            amount: if cap == 0 { 1.0 } else { 1.0 / cap as f64 },
        });
        if units[chosen as usize] == limit {
            heap.retain(|e| e.node != chosen);
        }
    }

    let mut result = AllocationResult::from_log(n, log)?;
    if cap > 0 {
        // Grid values k/N rather than the accumulated sum of k copies of 1/N.
        let exact: Vec<f64> = units.iter().map(|&k| k as f64 / cap as f64).collect();
        result.x = InfluenceVector::new(exact)?;
    }
    let samples = oracle.samples(&units, 1)?;
    result.estimated_spread = Some(match p.estimator {
        Estimator::MonteCarlo { seed, .. } => SpreadEstimate::from_samples(&samples, seed),
        _ => SpreadEstimate::exact(samples[0]),
    });
    Ok(result)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    /// Last evaluated gain: exact when `round` is the current round, an upper
    /// bound otherwise.
    bound: f64,
    stderr: f64,
    node: NodeId,
    round: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    /// Larger bound first, then lower id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.node.cmp(&self.node))
    }
}

/// Refreshes the heap until the leader and every candidate that could be within
/// its tie band hold current-round gains; returns that band.
fn lazy_band(heap: &mut BinaryHeap<Entry>, round: &mut Round<'_>, r: u64) -> Result<Vec<Entry>, OptimizeError> {
    loop {
        let Some(&top) = heap.peek() else {
            return Ok(Vec::new());
        };
        if top.round != r {
            heap.pop();
            heap.push(round.evaluate(top.node, r)?);
            continue;
        }
        let floor = top.bound - round.oracle.band(&top);
        let mut popped = Vec::new();
        while heap.peek().is_some_and(|e| e.bound >= floor) {
            popped.push(heap.pop().expect("peeked"));
        }
        let mut refreshed = false;
        for e in &mut popped {
            if e.round != r {
                *e = round.evaluate(e.node, r)?;
                refreshed = true;
            }
        }
        let band: Vec<Entry> = popped.iter().filter(|e| e.bound >= floor).copied().collect();
        heap.extend(popped);
        if !refreshed {
            return Ok(band);
        }
    }
}

fn naive_entries(heap: &BinaryHeap<Entry>, round: &mut Round<'_>, r: u64) -> Result<BinaryHeap<Entry>, OptimizeError> {
    let mut nodes: Vec<NodeId> = heap.iter().map(|e| e.node).collect();
    nodes.sort_unstable();
    nodes.into_iter().map(|v| round.evaluate(v, r)).collect()
}

/// Highest gain in the band, lowest id on ties; a Monte-Carlo band with several
/// members is re-scored at twice the replicates first.
fn choose(band: &[Entry], round: &mut Round<'_>) -> Result<NodeId, OptimizeError> {
    let rescore = band.len() > 1 && matches!(round.oracle.estimator, Estimator::MonteCarlo { .. });
    let mut best: Option<(f64, NodeId)> = None;
    for e in band {
        let gain = if rescore { round.gain(e.node, 2)?.0 } else { e.bound };
        best = match best {
            Some((g, v)) if g > gain + TIE_SLACK || ((g - gain).abs() <= TIE_SLACK && v < e.node) => Some((g, v)),
            _ => Some((gain, e.node)),
        };
    }
    Ok(best.expect("non-empty band").1)
}

struct Round<'a> {
    oracle: &'a Oracle<'a>,
    units: &'a [u32],
    /// Samples of the current allocation at 1× and 2× replicates.
    base: [Option<Vec<f64>>; 2],
}

impl Round<'_> {
    fn evaluate(&mut self, v: NodeId, r: u64) -> Result<Entry, OptimizeError> {
        let (bound, stderr) = self.gain(v, 1)?;
        Ok(Entry {
            bound,
            stderr,
            node: v,
            round: r,
        })
    }

    /// Paired marginal gain of one step on `v`: mean and standard error of the
    /// per-replicate differences.
    fn gain(&mut self, v: NodeId, scale: u64) -> Result<(f64, f64), OptimizeError> {
        let slot = (scale - 1) as usize;
        if self.base[slot].is_none() {
            self.base[slot] = Some(self.oracle.samples(self.units, scale)?);
        }
        let mut moved = self.units.to_vec();
        moved[v as usize] += 1;
        let with = self.oracle.samples(&moved, scale)?;
        let base = self.base[slot].as_ref().expect("filled");
        let diffs: Vec<f64> = with.iter().zip(base).map(|(a, b)| a - b).collect();
        let est = SpreadEstimate::from_samples(&diffs, 0);
        Ok((est.mean, est.stderr))
    }
}

struct Oracle<'a> {
    model: &'a CascadeModel,
    estimator: &'a Estimator,
    cap: u32,
}

impl Oracle<'_> {
    fn band(&self, leader: &Entry) -> f64 {
        match self.estimator {
            Estimator::MonteCarlo { .. } => leader.stderr.max(TIE_SLACK),
            _ => TIE_SLACK,
        }
    }

    /// Objective samples for the allocation `units` (one value for noiseless
    /// estimators).
    fn samples(&self, units: &[u32], scale: u64) -> Result<Vec<f64>, OptimizeError> {
        let n = units.len();
        let (seeds, x) = if self.cap == 0 {
            let seeds: Vec<NodeId> = (0..n as NodeId).filter(|&v| units[v as usize] > 0).collect();
            (seeds, InfluenceVector::zeros(n))
        } else {
            let x = units.iter().map(|&k| k as f64 / self.cap as f64).collect();
            (Vec::new(), InfluenceVector::new(x)?)
        };
        Ok(match self.estimator {
            Estimator::MonteCarlo { replicates, seed } => {
                replicate_spreads(self.model, &seeds, &x, replicates * scale, *seed)?
            }
            Estimator::Exact if self.cap == 0 => vec![exact_spread_of_set_small(self.model, &seeds)?],
            Estimator::Exact => vec![exact_spread_small(self.model, &x)?],
            Estimator::FixedThresholds(t) => {
                let draw = Realization::fixed(t.clone());
                vec![run_cascade_realized(self.model, &seeds, &x, &draw)?.spread]
            }
        })
    }
}
