//! Whitespace-separated edge lists (SNAP style).
//!
//! Each non-comment line is `u v [w]`. A line holding a single id declares a node
//! without arcs, which lets isolated nodes survive a write/read cycle. Node ids are
//! relabelled densely in order of first appearance.

use super::{DirectedGraph, GraphBuilder, GraphError, NodeId};
use indexmap::IndexMap;
use std::io::Write;
use std::path::Path;

pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<DirectedGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, directed)
}

pub fn parse_edge_list(text: &str, directed: bool) -> Result<DirectedGraph, GraphError> {
    let mut ids: IndexMap<u64, NodeId> = IndexMap::new();
    let mut intern = |raw: u64| -> NodeId {
        let next = ids.len() as NodeId;
        *ids.entry(raw).or_insert(next)
    };
    let mut arcs = Vec::new();
    let mut all_weighted = true;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_id = |s: &str| {
            s.parse::<u64>().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("bad node id `{s}`"),
            })
        };
        match fields.as_slice() {
            [v] => {
                intern(parse_id(v)?);
            }
            [u, v, rest @ ..] if rest.len() <= 1 => {
                let u = intern(parse_id(u)?);
                let v = intern(parse_id(v)?);
                let weight = match rest.first() {
                    Some(w) => {
                        let w: f64 = w.parse().map_err(|_| GraphError::Parse {
                            line: lineno,
                            message: format!("bad weight `{w}`"),
                        })?;
                        if !(0.0..=1.0).contains(&w) {
                            return Err(GraphError::WeightOutOfRange { line: lineno, weight: w });
                        }
                        w
                    }
                    None => {
                        all_weighted = false;
                        1.0
                    }
                };
                arcs.push((u, v, weight));
            }
            _ => {
                return Err(GraphError::Parse {
                    line: lineno,
                    message: format!("expected `u v [w]`, got {} fields", fields.len()),
                })
            }
        }
    }

    let mut builder = GraphBuilder::new(ids.len())
        .directed(directed)
        .labels(ids.keys().copied().collect())
        .weights_from_input(all_weighted && !arcs.is_empty());
    for (u, v, w) in arcs {
        builder.add_edge(u, v, w);
    }
    builder.build()
}

/// Writes `g` so that [`parse_edge_list`] with the same directedness rebuilds it
/// exactly: same dense ids, same arcs in the same order, bit-identical weights.
pub fn write_edge_list<W: Write>(g: &DirectedGraph, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# {} nodes, {} arcs, {}",
        g.node_count(),
        g.arc_count(),
        if g.is_directed() { "directed" } else { "undirected" }
    )?;
    let mut seen = vec![false; g.node_count()];
    // Lowest id that has not been written yet; ids must first appear in ascending order.
    let mut next = 0usize;
    for e in g.edges() {
        let (u, v) = (e.source as usize, e.target as usize);
        let fresh: Vec<usize> = [u, v].into_iter().filter(|&x| !seen[x]).collect();
        let in_order = match fresh.as_slice() {
            [] => true,
            [a] => *a == next,
            [a, b] => *a == next && *b == next + 1,
            _ => unreachable!(),
        };
        if !in_order {
            let hi = *fresh.iter().max().unwrap();
            for (x, s) in seen.iter_mut().enumerate().take(hi + 1).skip(next) {
                if !*s {
                    *s = true;
                    writeln!(out, "{}", g.label(x as NodeId))?;
                }
            }
        }
        seen[u] = true;
        seen[v] = true;
        while next < seen.len() && seen[next] {
            next += 1;
        }
        writeln!(out, "{} {} {}", g.label(e.source), g.label(e.target), e.weight)?;
    }
    for (x, &s) in seen.iter().enumerate().skip(next) {
        if !s {
            writeln!(out, "{}", g.label(x as NodeId))?;
        }
    }
    Ok(())
}
