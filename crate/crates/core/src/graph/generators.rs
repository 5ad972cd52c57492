//! Synthetic topologies for desk-scale experiments. All arcs get weight 1; apply a
//! [`WeightModel`](super::WeightModel) afterwards.

use super::{DirectedGraph, GraphBuilder, NodeId};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Undirected Barabási–Albert graph: each new node attaches to `edges_per_node`
/// distinct existing nodes chosen proportionally to degree.
pub fn preferential_attachment(n: usize, edges_per_node: usize, seed: u64) -> DirectedGraph {
    assert!(edges_per_node >= 1 && n > edges_per_node);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = GraphBuilder::new(n).directed(false);
    // Every edge endpoint appears once here, so a uniform pick is degree-proportional.
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * n * edges_per_node);
    let core = edges_per_node + 1;
    for u in 0..core as NodeId {
        for v in (u + 1)..core as NodeId {
            builder.add_edge(u, v, 1.0);
            endpoints.extend([u, v]);
        }
    }
    for v in core as NodeId..n as NodeId {
        let mut targets: Vec<NodeId> = Vec::with_capacity(edges_per_node);
        while targets.len() < edges_per_node {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            builder.add_edge(v, t, 1.0);
            endpoints.extend([v, t]);
        }
    }
    builder.build().expect("valid by construction")
}

/// Random DAG on `0..n` (arcs go from lower to higher id); node `v` draws up to
/// `max_parents` distinct parents uniformly from `0..v`.
pub fn random_dag(n: usize, max_parents: usize, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = GraphBuilder::new(n);
    for v in 1..n {
        let k = rng.gen_range(0..=max_parents.min(v));
        for u in sample(&mut rng, v, k).into_iter() {
            builder.add_edge(u as NodeId, v as NodeId, 1.0);
        }
    }
    builder.build().expect("valid by construction")
}

/// Undirected `rows × cols` lattice with 4-neighbourhoods.
pub fn grid_2d(rows: usize, cols: usize) -> DirectedGraph {
    let mut builder = GraphBuilder::new(rows * cols).directed(false);
    let id = |r: usize, c: usize| (r * cols + c) as NodeId;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                builder.add_edge(id(r, c), id(r, c + 1), 1.0);
            }
            if r + 1 < rows {
                builder.add_edge(id(r, c), id(r + 1, c), 1.0);
            }
        }
    }
    builder.build().expect("valid by construction")
}
