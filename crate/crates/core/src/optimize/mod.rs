//! Allocation algorithms: discretized greedy, the degree/discount/random/uniform
//! heuristics, and the DAG solver built on single-node spreads.

mod dag;
mod greedy;
mod heuristics;

pub use dag::{dag_linear_optimize, dag_single_node_spread, dag_single_node_spreads, SaturationSets};
pub use greedy::{greedy_fractional, greedy_integral, GreedyMode};
pub use heuristics::{heuristic_allocate, Heuristic};

use crate::cascade::{CascadeError, CascadeModel, InfluenceVector, SpreadEstimate, ThresholdVector};
use crate::graph::{GraphError, NodeId};
use crate::reductions::{GridStep, ReductionError, GRID_SLACK};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// How greedy scores a candidate allocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Mean over `replicates` uniform threshold draws; all candidates in a run
    /// share the draws.
    MonteCarlo { replicates: u64, seed: u64 },
    /// [`exact_spread_small`](crate::cascade::exact_spread_small); small instances only.
    Exact,
    /// A single deterministic cascade under the given thresholds.
    FixedThresholds(ThresholdVector),
}

/// Maximize spread subject to `‖x‖₁ ≤ budget`, moving in steps of `grid`.
#[derive(Debug, Clone)]
pub struct BudgetedProblem {
    pub model: CascadeModel,
    pub budget: f64,
    pub grid: GridStep,
    pub estimator: Estimator,
}

impl BudgetedProblem {
    pub fn new(model: CascadeModel, budget: f64, grid: GridStep, estimator: Estimator) -> Result<Self, OptimizeError> {
        check_budget(budget, model.node_count())?;
        if let Estimator::FixedThresholds(t) = &estimator {
            if t.len() != model.node_count() {
                return Err(CascadeError::SizeMismatch {
                    what: "threshold vector",
                    got: t.len(),
                    expected: model.node_count(),
                }
                .into());
            }
        }
        Ok(BudgetedProblem {
            model,
            budget,
            grid,
            estimator,
        })
    }

    /// `K/δ`, the number of greedy rounds.
    pub fn steps(&self) -> Result<u64, OptimizeError> {
        self.grid.count_in(self.budget).ok_or_else(|| {
            OptimizeError::InvalidBudget(format!("{} is not a multiple of δ = {}", self.budget, self.grid))
        })
    }
}

pub(crate) fn check_budget(budget: f64, n: usize) -> Result<(), OptimizeError> {
    if budget.is_nan() || budget < 0.0 || budget > n as f64 + GRID_SLACK {
        return Err(OptimizeError::InvalidBudget(format!("{budget} outside [0, {n}]")));
    }
    Ok(())
}

pub(crate) fn integral_budget(budget: f64, n: usize) -> Result<usize, OptimizeError> {
    check_budget(budget, n)?;
    let k = budget.round();
    if (k - budget).abs() > GRID_SLACK {
        return Err(OptimizeError::InvalidBudget(format!("{budget} is not an integer")));
    }
    Ok((k as usize).min(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spend {
    pub node: NodeId,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// For integral algorithms, the indicator of the chosen seed set.
    pub x: InfluenceVector,
    /// Moves in the order they were made; replaying them reproduces `x`.
    pub spend_log: Vec<Spend>,
    /// The algorithm's own estimate of `σ(x)`, when it computes one.
    pub estimated_spread: Option<SpreadEstimate>,
}

impl AllocationResult {
    pub(crate) fn from_log(n: usize, spend_log: Vec<Spend>) -> Result<Self, OptimizeError> {
        let mut values = vec![0.0; n];
        for s in &spend_log {
            values[s.node as usize] += s.amount;
        }
        for v in &mut values {
            *v = v.min(1.0);
        }
        Ok(AllocationResult {
            x: InfluenceVector::new(values)?,
            spend_log,
            estimated_spread: None,
        })
    }

    /// Sum of the logged amounts per node.
    pub fn replay(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.x.len()];
        for s in &self.spend_log {
            values[s.node as usize] += s.amount;
        }
        values
    }

    /// Writes the spend log as CSV with columns `node,amount,cumulative_budget`.
    pub fn write_spend_log<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["node", "amount", "cumulative_budget"])?;
        let mut total = 0.0;
        for s in &self.spend_log {
            total += s.amount;
            writer.write_record([s.node.to_string(), s.amount.to_string(), total.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}
