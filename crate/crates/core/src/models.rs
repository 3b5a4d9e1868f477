//! Transition-probability samplers: first-order uniform walks, second-order
//! biased walks, and restart-based walks, behind one model interface.
//!
//! Sampling is driven by counter-based streams keyed on
//! `(seed, walk, epoch, position)`, so a corpus is a pure function of its
//! seed no matter how work is scheduled across threads.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hybrid::{GraphSnapshot, VertexId};
use crate::rng::StepRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkModel {
    /// Uniform over the current vertex's neighbors.
    DeepWalk,
    /// Second-order walk: weight 1/p for returning to the previous vertex,
    /// 1 for neighbors of the previous vertex, 1/q otherwise.
    Node2vec { p: f64, q: f64 },
    /// Uniform neighbor steps with restart probability `alpha`, modeled as
    /// early termination.
    Ppr { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("node2vec parameters must be positive (p={p}, q={q})")]
    BadNode2vec { p: String, q: String },
    #[error("restart probability must lie in (0, 1), got {0}")]
    BadAlpha(String),
}

impl WalkModel {
    pub fn order(&self) -> u8 {
        match self {
            WalkModel::Node2vec { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            WalkModel::DeepWalk => Ok(()),
            WalkModel::Node2vec { p, q } => {
                if p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::BadNode2vec {
                        p: p.to_string(),
                        q: q.to_string(),
                    })
                }
            }
            WalkModel::Ppr { alpha } => {
                if alpha > 0.0 && alpha < 1.0 {
                    Ok(())
                } else {
                    Err(ModelError::BadAlpha(alpha.to_string()))
                }
            }
        }
    }
}

/// Adjacency reads needed by the samplers; implemented by the hybrid-tree
/// snapshot and by the inverted-index baseline so both draw identical
/// sequences from identical seeds.
pub trait NeighborAccess {
    fn degree(&self, v: VertexId) -> Option<u64>;
    /// k-th smallest neighbor of `v`.
    fn neighbor_at(&self, v: VertexId, k: u64) -> Option<VertexId>;
    fn has_edge(&self, a: VertexId, b: VertexId) -> bool;
}

impl NeighborAccess for GraphSnapshot {
    fn degree(&self, v: VertexId) -> Option<u64> {
        GraphSnapshot::degree(self, v)
    }
    fn neighbor_at(&self, v: VertexId, k: u64) -> Option<VertexId> {
        GraphSnapshot::neighbor_at(self, v, k)
    }
    fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        GraphSnapshot::has_edge(self, a, b)
    }
}

/// Walker position: `previous` is required beyond the first step of
/// second-order models.
#[derive(Debug, Clone, Copy)]
pub struct SamplerState {
    pub current: VertexId,
    pub previous: Option<VertexId>,
}

/// Outcome of one sampling step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Next(VertexId),
    /// Restart-based models terminate the walk early.
    Stop,
    /// The current vertex has no outgoing edge; the walk truncates here.
    DeadEnd,
}

/// Draws the next vertex. Exact target distributions: uniform for
/// first-order walks, the three-weight-class distribution for second-order
/// walks realized by rejection against the class maximum.
pub fn sample_next<G: NeighborAccess>(
    graph: &G,
    state: &SamplerState,
    model: &WalkModel,
    rng: &mut StepRng,
) -> Step {
    let Some(degree) = graph.degree(state.current) else {
        return Step::DeadEnd;
    };
    if degree == 0 {
        return Step::DeadEnd;
    }
    match *model {
        WalkModel::DeepWalk => Step::Next(pick_uniform(graph, state.current, degree, rng)),
        WalkModel::Ppr { alpha } => {
            if rng.unit() < alpha {
                Step::Stop
            } else {
                Step::Next(pick_uniform(graph, state.current, degree, rng))
            }
        }
        WalkModel::Node2vec { p, q } => {
            let Some(prev) = state.previous else {
                return Step::Next(pick_uniform(graph, state.current, degree, rng));
            };
            let (w_return, w_stay, w_far) = (1.0 / p, 1.0, 1.0 / q);
            let w_max = w_return.max(w_stay).max(w_far);
            loop {
                let candidate = pick_uniform(graph, state.current, degree, rng);
                let weight = if candidate == prev {
                    w_return
                } else if graph.has_edge(candidate, prev) {
                    w_stay
                } else {
                    w_far
                };
                if rng.unit() * w_max < weight {
                    return Step::Next(candidate);
                }
            }
        }
    }
}

fn pick_uniform<G: NeighborAccess>(
    graph: &G,
    v: VertexId,
    degree: u64,
    rng: &mut StepRng,
) -> VertexId {
    graph
        .neighbor_at(v, rng.below(degree))
        .expect("degree-checked neighbor rank")
}

/// Exact next-vertex distribution for the state, conditioned on the walk
/// continuing (restarts carry no next vertex).
pub fn transition_distribution<G: NeighborAccess>(
    graph: &G,
    state: &SamplerState,
    model: &WalkModel,
) -> Vec<(VertexId, f64)> {
    let degree = graph.degree(state.current).unwrap_or(0);
    if degree == 0 {
        return Vec::new();
    }
    let neighbors: Vec<VertexId> = (0..degree)
        .map(|k| graph.neighbor_at(state.current, k).expect("in-degree rank"))
        .collect();
    match (*model, state.previous) {
        (WalkModel::Node2vec { p, q }, Some(prev)) => {
            let weights: Vec<f64> = neighbors
                .iter()
                .map(|&c| {
                    if c == prev {
                        1.0 / p
                    } else if graph.has_edge(c, prev) {
                        1.0
                    } else {
                        1.0 / q
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            neighbors
                .into_iter()
                .zip(weights)
                .map(|(v, w)| (v, w / total))
                .collect()
        }
        _ => {
            let u = 1.0 / degree as f64;
            neighbors.into_iter().map(|v| (v, u)).collect()
        }
    }
}

/// Monte-Carlo frequencies of [`sample_next`]; serves as the sampling
/// oracle in statistical tests. Returns the draw counts and the number of
/// early terminations.
pub fn empirical_distribution<G: NeighborAccess>(
    graph: &G,
    model: &WalkModel,
    state: &SamplerState,
    trials: u64,
    seed: u64,
) -> (BTreeMap<VertexId, u64>, u64) {
    let mut counts = BTreeMap::new();
    let mut stops = 0;
    for t in 0..trials {
        let mut rng = StepRng::for_step(seed ^ 0x7a5c_39e1_1f04_d2b7, t, 0, 0);
        match sample_next(graph, state, model, &mut rng) {
            Step::Next(v) => *counts.entry(v).or_insert(0) += 1,
            Step::Stop | Step::DeadEnd => stops += 1,
        }
    }
    (counts, stops)
}
