//! Derived instances with known ground truth: the activator-node reduction from
//! fractional to integral influence, the two gap examples, and the hardness
//! constructions (independent set, amplification, max coverage).

mod activators;
mod gaps;
mod hardness;

pub use activators::{reduce_fractional_to_integral, ReducedInstance};
pub use gaps::{make_cycle_gap, make_path_gap, PathGap};
pub use hardness::{
    amplification_sink_count, amplify_instance, reduce_independent_set, reduce_max_coverage, HardnessInstance,
};

use crate::cascade::CascadeError;
use crate::graph::{GraphError, NodeId};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("grid step must be 1/N for a positive integer N, got {0}")]
    InvalidGrid(String),
    #[error("x[{node}] = {value} is not on the grid")]
    OffGrid { node: NodeId, value: f64 },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// Tolerance for snapping allocations and step sizes onto a grid.
pub const GRID_SLACK: f64 = 1e-9;

/// Grid step `δ = 1/N`, stored as `N` so that grid points are exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridStep {
    steps: u32,
}

impl GridStep {
    pub fn new(steps: u32) -> Result<Self, ReductionError> {
        if steps == 0 {
            return Err(ReductionError::InvalidGrid("1/0".into()));
        }
        Ok(GridStep { steps })
    }

    pub fn from_delta(delta: f64) -> Result<Self, ReductionError> {
        let inverse = 1.0 / delta;
        if !(delta > 0.0 && delta <= 1.0) || !inverse.is_finite() || inverse > u32::MAX as f64 {
            return Err(ReductionError::InvalidGrid(delta.to_string()));
        }
        let steps = inverse.round();
        if (steps * delta - 1.0).abs() > GRID_SLACK {
            return Err(ReductionError::InvalidGrid(delta.to_string()));
        }
        GridStep::new(steps as u32)
    }

    /// `N`, the number of steps from 0 to 1.
    pub fn steps(self) -> u32 {
        self.steps
    }

    pub fn delta(self) -> f64 {
        1.0 / self.steps as f64
    }

    /// The grid point `k/N`.
    pub fn value(self, k: u32) -> f64 {
        k as f64 / self.steps as f64
    }

    /// `k` with `value ≈ k/N`, or `None` when `value` is more than [`GRID_SLACK`]
    /// away from every grid point.
    pub fn units(self, value: f64) -> Option<u32> {
        let k = (value * self.steps as f64).round();
        if k < 0.0 || (k - value * self.steps as f64).abs() > GRID_SLACK * self.steps as f64 {
            return None;
        }
        Some(k as u32)
    }

    /// Number of steps that make up `amount`, if it is a whole number of them.
    pub fn count_in(self, amount: f64) -> Option<u64> {
        let k = (amount * self.steps as f64).round();
        if k < 0.0 || (k - amount * self.steps as f64).abs() > GRID_SLACK * self.steps as f64 {
            return None;
        }
        Some(k as u64)
    }
}

impl fmt::Display for GridStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.steps)
    }
}

/// Accepts `1/N` or a decimal such as `0.25`.
impl FromStr for GridStep {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(denominator) = s.strip_prefix("1/") {
            let steps = denominator
                .trim()
                .parse::<u32>()
                .map_err(|_| ReductionError::InvalidGrid(s.to_string()))?;
            return GridStep::new(steps);
        }
        let delta = s.parse::<f64>().map_err(|_| ReductionError::InvalidGrid(s.to_string()))?;
        GridStep::from_delta(delta)
    }
}
