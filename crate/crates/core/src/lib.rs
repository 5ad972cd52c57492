//! Fractional influence maximization under general threshold cascades.

pub mod cascade;
pub mod graph;
pub mod harness;
pub mod optimize;
pub mod reductions;
