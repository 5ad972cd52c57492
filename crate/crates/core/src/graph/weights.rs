use super::{DirectedGraph, GraphError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Low, medium and high influence levels of the trivalency model.
pub const TRIVALENCY_LEVELS: [f64; 3] = [0.001, 0.01, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightModel {
    /// `w_uv = 1 / d⁻(v)`: every node's in-weights sum to one.
    WeightedCascade,
    /// Each arc independently uniform over [`TRIVALENCY_LEVELS`]; in-weights may exceed one.
    Trivalency,
    /// Keep the weights read from the edge list.
    FromFile,
}

impl FromStr for WeightModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wc" | "weighted-cascade" | "weightedcascade" => Ok(WeightModel::WeightedCascade),
            "trivalency" | "tr" => Ok(WeightModel::Trivalency),
            "file" | "fromfile" => Ok(WeightModel::FromFile),
            other => Err(format!("unknown weight model `{other}` (expected wc, trivalency or file)")),
        }
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightModel::WeightedCascade => "wc",
            WeightModel::Trivalency => "trivalency",
            WeightModel::FromFile => "file",
        })
    }
}

/// Returns a copy of `g` with weights set by `model`. `seed` only matters for
/// [`WeightModel::Trivalency`], which draws arcs in stored order.
pub fn assign_weights(g: &DirectedGraph, model: WeightModel, seed: u64) -> Result<DirectedGraph, GraphError> {
    let weights: Vec<f64> = match model {
        WeightModel::FromFile => {
            if !g.has_input_weights() && g.arc_count() > 0 {
                return Err(GraphError::MissingWeights);
            }
            return Ok(g.clone());
        }
        WeightModel::WeightedCascade => g
            .edges()
            .iter()
            .map(|e| 1.0 / g.in_degree(e.target) as f64)
            .collect(),
        WeightModel::Trivalency => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            g.edges()
                .iter()
                .map(|_| *TRIVALENCY_LEVELS.choose(&mut rng).unwrap())
                .collect()
        }
    };
    g.reweighted(&weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_cascade_splits_evenly() {
        let g = DirectedGraph::from_arcs(6, (0..4).map(|u| (u, 5, 1.0)).chain([(4, 0, 0.3)])).unwrap();
        let g = assign_weights(&g, WeightModel::WeightedCascade, 0).unwrap();
        assert!(g.in_weights(5).iter().all(|&w| w == 0.25));
        assert_eq!(g.in_weights(0), &[1.0]);
    }

    #[test]
    fn weighted_cascade_in_weights_sum_to_one() {
        let g = crate::graph::preferential_attachment(300, 3, 9);
        let g = assign_weights(&g, WeightModel::WeightedCascade, 0).unwrap();
        for v in g.nodes().filter(|&v| g.in_degree(v) > 0) {
            assert!((g.in_weight_sum(v) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trivalency_histogram_is_uniform() {
        // 1000 arcs: star from node 0 plus a second layer.
        let arcs = (1..=1000u32).map(|v| (0, v, 1.0));
        let g = DirectedGraph::from_arcs(1001, arcs).unwrap();
        let g = assign_weights(&g, WeightModel::Trivalency, 42).unwrap();
        let mut counts = [0usize; 3];
        for e in g.edges() {
            let k = TRIVALENCY_LEVELS.iter().position(|&l| l == e.weight).expect("level");
            counts[k] += 1;
        }
        // Each count is Binomial(1000, 1/3); sd = sqrt(1000 * 1/3 * 2/3) ≈ 14.9.
        let sd = (1000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0 / 3.0).abs() <= 5.0 * sd, "{counts:?}");
        }
        // Chi-square with 2 dof; 25 is far beyond the 0.9999 quantile (~18.4).
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 1000.0 / 3.0).powi(2) / (1000.0 / 3.0))
            .sum();
        assert!(chi2 < 25.0, "chi2 = {chi2}");
    }

    #[test]
    fn trivalency_is_seeded() {
        let g = crate::graph::grid_2d(5, 5);
        let a = assign_weights(&g, WeightModel::Trivalency, 7).unwrap();
        let b = assign_weights(&g, WeightModel::Trivalency, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_file_requires_weights() {
        let g = crate::graph::parse_edge_list("0 1\n", true).unwrap();
        assert!(matches!(
            assign_weights(&g, WeightModel::FromFile, 0),
            Err(GraphError::MissingWeights)
        ));
        let g = crate::graph::parse_edge_list("0 1 0.3\n", true).unwrap();
        assert_eq!(assign_weights(&g, WeightModel::FromFile, 0).unwrap(), g);
    }

    #[test]
    fn parses_names() {
        assert_eq!("wc".parse::<WeightModel>().unwrap(), WeightModel::WeightedCascade);
        assert_eq!("TRIVALENCY".parse::<WeightModel>().unwrap(), WeightModel::Trivalency);
        assert!("nope".parse::<WeightModel>().is_err());
    }
}
