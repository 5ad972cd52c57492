use super::{
    CascadeError, CascadeModel, CascadeOutcome, InfluenceKind, InfluenceVector, ThresholdVector,
    TriggeringSets,
};
use crate::graph::NodeId;

/// Everything random about one cascade: thresholds and, for stochastic triggering
/// models, the triggering sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub thresholds: ThresholdVector,
    pub triggering: Option<TriggeringSets>,
}

impl Realization {
    pub fn fixed(thresholds: ThresholdVector) -> Self {
        Realization {
            thresholds,
            triggering: None,
        }
    }

    /// The draw Monte-Carlo estimation uses for `replicate`.
    pub fn sample(model: &CascadeModel, master_seed: u64, replicate: u64) -> Self {
        let thresholds = ThresholdVector::uniform(model.node_count(), master_seed, replicate);
        let triggering = model.stochastic_sampler().map(|sampler| {
            let mut sets = TriggeringSets::default();
            let mut rng = super::montecarlo::triggering_stream(master_seed, replicate);
            sampler.draw_into(model.graph(), &mut rng, &mut sets);
            sets
        });
        Realization { thresholds, triggering }
    }
}

/// Fractional cascade from `S_0 = ∅` under fixed thresholds.
///
/// Fails with [`CascadeError::MissingTriggeringSets`] for stochastic triggering
/// models; use [`run_cascade_realized`] with a sampled [`Realization`] instead.
pub fn run_cascade(
    model: &CascadeModel,
    x: &InfluenceVector,
    t: &ThresholdVector,
) -> Result<CascadeOutcome, CascadeError> {
    run_cascade_realized(model, &[], x, &Realization::fixed(t.clone()))
}

/// Cascade from seed set `seeds` (active at stage 0) with direct influence `x`.
/// Integral runs pass an all-zero `x`; fractional runs pass no seeds.
pub fn run_cascade_realized(
    model: &CascadeModel,
    seeds: &[NodeId],
    x: &InfluenceVector,
    draw: &Realization,
) -> Result<CascadeOutcome, CascadeError> {
    let n = model.node_count();
    check_len("influence vector", x.len(), n)?;
    check_len("threshold vector", draw.thresholds.len(), n)?;
    if let Some(&s) = seeds.iter().find(|&&s| s as usize >= n) {
        return Err(CascadeError::UnknownNode(s));
    }
    let sets = match (model.stochastic_sampler(), &draw.triggering) {
        (Some(_), None) => return Err(CascadeError::MissingTriggeringSets),
        (Some(_), Some(sets)) => {
            check_len("triggering sets", sets.len(), n)?;
            Some(sets)
        }
        (None, _) => None,
    };

    let mut sim = Simulator::new(model);
    let mut trace = Vec::new();
    let spread = sim.run(seeds, x.values(), draw.thresholds.values(), sets, Some(&mut trace));
    let mut initial: Vec<NodeId> = seeds.to_vec();
    initial.sort_unstable();
    initial.dedup();
    let mut final_active = sim.active_nodes();
    final_active.sort_unstable();
    Ok(CascadeOutcome {
        initial,
        stage_trace: trace,
        final_active,
        spread,
        thresholds: draw.thresholds.clone(),
    })
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), CascadeError> {
    if got == expected {
        Ok(())
    } else {
        Err(CascadeError::SizeMismatch { what, got, expected })
    }
}

/// Reusable cascade state for one worker.
pub(crate) struct Simulator<'m> {
    model: &'m CascadeModel,
    active: Vec<bool>,
    /// Influence received from the active set, `f_v(S)`.
    received: Vec<f64>,
    stamp: Vec<u32>,
    epoch: u32,
    candidates: Vec<NodeId>,
    fresh: Vec<NodeId>,
    pub(crate) thresholds: Vec<f64>,
    pub(crate) sets: TriggeringSets,
}

impl<'m> Simulator<'m> {
    pub(crate) fn new(model: &'m CascadeModel) -> Self {
        let n = model.node_count();
        Simulator {
            model,
            active: vec![false; n],
            received: vec![0.0; n],
            stamp: vec![0; n],
            epoch: 0,
            candidates: Vec::with_capacity(n),
            fresh: Vec::new(),
            thresholds: vec![0.0; n],
            sets: TriggeringSets::default(),
        }
    }

    fn active_nodes(&self) -> Vec<NodeId> {
        (0..self.active.len() as NodeId).filter(|&v| self.active[v as usize]).collect()
    }

    /// Fills `self.thresholds` (and `self.sets` for stochastic triggering) with the
    /// draw for `replicate`.
    pub(crate) fn draw(&mut self, master_seed: u64, replicate: u64) {
        super::montecarlo::uniform_thresholds(master_seed, replicate, &mut self.thresholds);
        if let Some(sampler) = self.model.stochastic_sampler() {
            let mut rng = super::montecarlo::triggering_stream(master_seed, replicate);
            sampler.draw_into(self.model.graph(), &mut rng, &mut self.sets);
        }
    }

    /// Runs one cascade against the draw stored by [`draw`](Self::draw).
    pub(crate) fn run_drawn(&mut self, seeds: &[NodeId], x: &[f64]) -> f64 {
        let thresholds = std::mem::take(&mut self.thresholds);
        let sets = std::mem::take(&mut self.sets);
        let stochastic = self.model.stochastic_sampler().is_some();
        let spread = self.run(seeds, x, &thresholds, stochastic.then_some(&sets), None);
        self.thresholds = thresholds;
        self.sets = sets;
        spread
    }

    /// Synchronous stages until no node activates (at most `n` stages). `x` may be
    /// empty, meaning all zeros. Returns the objective value of the final set.
    pub(crate) fn run(
        &mut self,
        seeds: &[NodeId],
        x: &[f64],
        thresholds: &[f64],
        drawn_sets: Option<&TriggeringSets>,
        mut trace: Option<&mut Vec<Vec<NodeId>>>,
    ) -> f64 {
        let model = self.model;
        let graph = model.graph();
        let n = graph.node_count();
        let counted = model.objective_nodes() as NodeId;
        let sets = match model.kind() {
            InfluenceKind::Triggering(super::TriggeringSampler::Deterministic(sets)) => Some(sets),
            InfluenceKind::Triggering(_) => drawn_sets,
            _ => None,
        };
        let direct = |v: NodeId| if x.is_empty() { 0.0 } else { x[v as usize] };

        self.active.fill(false);
        self.received.fill(0.0);
        let mut spread = 0usize;

        self.fresh.clear();
        for &s in seeds {
            if !self.active[s as usize] {
                self.active[s as usize] = true;
                self.fresh.push(s);
                spread += (s < counted) as usize;
            }
        }
        self.spread_influence(sets);

        // Stage 1 looks at every node; later stages only at out-neighbours of the
        // nodes activated in the previous stage, the only ones whose influence moved.
        self.candidates.clear();
        self.candidates.extend(0..n as NodeId);
        for _stage in 0..n {
            self.fresh.clear();
            for &v in &self.candidates {
                let vi = v as usize;
                if !self.active[vi] && (self.received[vi] + direct(v)).min(1.0) >= thresholds[vi] {
                    self.fresh.push(v);
                }
            }
            if self.fresh.is_empty() {
                break;
            }
            for &v in &self.fresh {
                self.active[v as usize] = true;
                spread += (v < counted) as usize;
            }
            if let Some(trace) = trace.as_deref_mut() {
                let mut stage = self.fresh.clone();
                stage.sort_unstable();
                trace.push(stage);
            }
            self.spread_influence(sets);
        }
        spread as f64
    }

    /// Pushes influence from `self.fresh` to out-neighbours and collects those
    /// out-neighbours (deduplicated) as the next candidates.
    fn spread_influence(&mut self, sets: Option<&TriggeringSets>) {
        let graph = self.model.graph();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.candidates.clear();
        for &u in &self.fresh {
            for (&v, &w) in graph.out_targets(u).iter().zip(graph.out_weights(u)) {
                let vi = v as usize;
                match sets {
                    Some(sets) => {
                        if sets.contains(v, u) {
                            self.received[vi] = 1.0;
                        }
                    }
                    None => self.received[vi] += w,
                }
                if self.stamp[vi] != self.epoch && !self.active[vi] {
                    self.stamp[vi] = self.epoch;
                    self.candidates.push(v);
                }
            }
        }
    }
}
