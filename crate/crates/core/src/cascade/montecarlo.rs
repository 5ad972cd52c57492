//! Monte-Carlo spread estimation.
//!
//! Replicate `r` of a run seeded with `master_seed` draws its thresholds from the
//! ChaCha8 stream keyed by `(master_seed, purpose = thresholds)` at stream position
//! `r`, node `v` taking the `v`-th value. Draws therefore depend only on
//! `(master_seed, r, v)`: runs on different allocations share thresholds (common
//! random numbers) and results do not depend on the number of worker threads.

use super::{CascadeError, CascadeModel, InfluenceVector, Simulator, SpreadEstimate};
use crate::graph::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const THRESHOLD_STREAM: u8 = 1;
const TRIGGERING_STREAM: u8 = 2;

fn stream(master_seed: u64, purpose: u8, replicate: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8] = purpose;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}

/// Fills `out` with i.i.d. Unif(0, 1] thresholds for `replicate`. Zero is excluded
/// so that a node receiving no influence never activates.
pub fn uniform_thresholds(master_seed: u64, replicate: u64, out: &mut [f64]) {
    let mut rng = stream(master_seed, THRESHOLD_STREAM, replicate);
    for t in out {
        *t = 1.0 - rng.gen::<f64>();
    }
}

pub(crate) fn triggering_stream(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    stream(master_seed, TRIGGERING_STREAM, replicate)
}

/// Objective value of every replicate, in replicate order.
pub fn replicate_spreads(
    model: &CascadeModel,
    seeds: &[NodeId],
    x: &InfluenceVector,
    replicates: u64,
    master_seed: u64,
) -> Result<Vec<f64>, CascadeError> {
    let n = model.node_count();
    if replicates == 0 {
        return Err(CascadeError::NoReplicates);
    }
    if x.len() != n {
        return Err(CascadeError::SizeMismatch {
            what: "influence vector",
            got: x.len(),
            expected: n,
        });
    }
    if let Some(&s) = seeds.iter().find(|&&s| s as usize >= n) {
        return Err(CascadeError::UnknownNode(s));
    }
    // Normalisation: nothing can activate without seeds or direct influence.
    if seeds.is_empty() && x.values().iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; replicates as usize]);
    }
    let samples = (0..replicates as usize)
        .into_par_iter()
        .map_init(
            || Simulator::new(model),
            |sim, r| {
                sim.draw(master_seed, r as u64);
                sim.run_drawn(seeds, x.values())
            },
        )
        .collect();
    Ok(samples)
}

/// Expected spread `σ(x)` of a fractional allocation (no initial seeds).
pub fn estimate_spread(
    model: &CascadeModel,
    x: &InfluenceVector,
    replicates: u64,
    master_seed: u64,
) -> Result<SpreadEstimate, CascadeError> {
    let samples = replicate_spreads(model, &[], x, replicates, master_seed)?;
    Ok(SpreadEstimate::from_samples(&samples, master_seed))
}

/// Expected spread of seed set `s` under integral semantics: `S_0 = s`, no direct
/// influence afterwards.
pub fn spread_of_set(
    model: &CascadeModel,
    s: &[NodeId],
    replicates: u64,
    master_seed: u64,
) -> Result<SpreadEstimate, CascadeError> {
    let zero = InfluenceVector::zeros(model.node_count());
    let samples = replicate_spreads(model, s, &zero, replicates, master_seed)?;
    Ok(SpreadEstimate::from_samples(&samples, master_seed))
}
