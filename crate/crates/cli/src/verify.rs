//! Statistical indistinguishability suite: after a fixed stream of edge
//! batches, the incrementally maintained corpus must be statistically
//! equivalent to one regenerated from scratch on the final graph.
//!
//! Over many independent seeds, successor counts are pooled per conditioning
//! cell (the current vertex for first-order models, the previous/current
//! pair for second-order ones). Both corpora must sit within a total
//! variation bound of the exact model distribution, and a two-sample
//! chi-square must fail to distinguish them on almost all cells.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use anyhow::{ensure, Result};
use rayon::prelude::*;
use streamwalk::corpus::{reconstruct_walk, CorpusConfig, RewriteLog};
use streamwalk::ctree::ChunkParams;
use streamwalk::engine::{EngineConfig, WalkEngine};
use streamwalk::hybrid::{EdgeBatch, EdgeOp, GraphSnapshot, VertexId};
use streamwalk::models::{transition_distribution, SamplerState, WalkModel};
use streamwalk::rng::StepRng;
use streamwalk::updater::MergePolicy;

use crate::stats::{chi_square_critical, chi_square_two_sample, total_variation};

#[derive(Debug, Clone)]
pub struct VerifyParams {
    pub vertices: u64,
    pub avg_degree: u64,
    pub batches: usize,
    pub batch_size: usize,
    pub walks_per_vertex: u32,
    pub walk_len: u64,
    pub seeds: u64,
    pub graph_seed: u64,
    pub delete_fraction: f64,
    pub tvd_threshold: f64,
    pub chi_alpha: f64,
    pub chi_pass_fraction: f64,
    /// Cells with fewer pooled samples than this are not judged.
    pub min_cell_samples: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            vertices: 50,
            avg_degree: 4,
            batches: 10,
            batch_size: 25,
            walks_per_vertex: 10,
            walk_len: 20,
            seeds: 200,
            graph_seed: 1,
            delete_fraction: 0.5,
            tvd_threshold: 0.05,
            chi_alpha: 0.01,
            chi_pass_fraction: 0.95,
            min_cell_samples: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub model: String,
    pub cells_judged: usize,
    pub max_tvd_updated: f64,
    pub max_tvd_scratch: f64,
    /// Pooled sample count of the worst updated/scratch cells.
    pub max_tvd_samples: (u64, u64),
    pub chi_cells: usize,
    pub chi_passed: usize,
    pub pass: bool,
}

impl ModelReport {
    pub fn chi_pass_fraction(&self) -> f64 {
        if self.chi_cells == 0 {
            1.0
        } else {
            self.chi_passed as f64 / self.chi_cells as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub models: Vec<ModelReport>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.models.iter().all(|m| m.pass)
    }
}

/// Conditioning cell: previous vertex (second order only) and current
/// vertex.
type Cell = (Option<VertexId>, VertexId);
type CellCounts = HashMap<Cell, BTreeMap<VertexId, u64>>;

/// Seeded graph: a ring for connectivity plus random chords up to the
/// requested average degree.
pub fn seeded_graph(vertices: u64, avg_degree: u64, seed: u64) -> Vec<(u64, u64)> {
    let mut edges: BTreeSet<(u64, u64)> = BTreeSet::new();
    for v in 0..vertices {
        let d = (v + 1) % vertices;
        edges.insert((v.min(d), v.max(d)));
    }
    let target = vertices * avg_degree / 2;
    let mut rng = StepRng::from_key(seed ^ 0xc0de_5eed_0f1e_2d3c);
    let mut attempts = 0;
    while (edges.len() as u64) < target && attempts < 100 * target {
        attempts += 1;
        let a = rng.below(vertices);
        let b = rng.below(vertices);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges.into_iter().collect()
}

/// Fixed update stream over the evolving edge set, deterministic in `seed`.
/// Each op is a deletion of a present edge with probability
/// `delete_fraction` (while enough edges remain), otherwise an insertion of
/// an absent pair, so the stream's insert/delete mix matches the requested
/// fraction instead of drifting with graph density.
pub fn seeded_batches(
    initial: &[(u64, u64)],
    vertices: u64,
    batches: usize,
    batch_size: usize,
    delete_fraction: f64,
    seed: u64,
) -> Vec<EdgeBatch> {
    let mut present: BTreeSet<(u64, u64)> = initial.iter().copied().collect();
    let mut edge_list: Vec<(u64, u64)> = present.iter().copied().collect();
    let floor = vertices; // keep the graph from collapsing
    let mut rng = StepRng::from_key(seed ^ 0xbeef_0000_1234_5678);
    let mut out = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut ops = Vec::with_capacity(batch_size);
        let mut touched = BTreeSet::new();
        let mut attempts = 0;
        while ops.len() < batch_size && attempts < 100_000 {
            attempts += 1;
            let delete =
                rng.unit() < delete_fraction && edge_list.len() as u64 > floor;
            if delete {
                let i = rng.below(edge_list.len() as u64) as usize;
                let key = edge_list[i];
                if !touched.insert(key) {
                    continue;
                }
                edge_list.swap_remove(i);
                present.remove(&key);
                ops.push((EdgeOp::Delete, key.0, key.1));
            } else {
                let a = rng.below(vertices);
                let b = rng.below(vertices);
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                if present.contains(&key) || !touched.insert(key) {
                    continue;
                }
                present.insert(key);
                edge_list.push(key);
                ops.push((EdgeOp::Insert, key.0, key.1));
            }
        }
        out.push(EdgeBatch::new(ops).expect("generated ops are normalized"));
    }
    out
}

/// Accumulates successor counts from reconstructed walks, stopping at the
/// first padded position (consecutive repeats cannot occur otherwise since
/// self-loops are rejected at ingestion).
fn accumulate_successors(walks: &[Vec<VertexId>], order: u8, counts: &mut CellCounts) {
    for verts in walks {
        for i in 0..verts.len() - 1 {
            if verts[i + 1] == verts[i] {
                break;
            }
            let cell = if order == 2 && i > 0 {
                (Some(verts[i - 1]), verts[i])
            } else {
                (None, verts[i])
            };
            *counts
                .entry(cell)
                .or_default()
                .entry(verts[i + 1])
                .or_insert(0) += 1;
        }
    }
}

fn merge_counts(into: &mut CellCounts, from: CellCounts) {
    for (cell, successors) in from {
        let slot = into.entry(cell).or_default();
        for (v, c) in successors {
            *slot.entry(v).or_insert(0) += c;
        }
    }
}

pub fn run_model(params: &VerifyParams, model: WalkModel) -> Result<ModelReport> {
    let edges = seeded_graph(params.vertices, params.avg_degree, params.graph_seed);
    let batches = seeded_batches(
        &edges,
        params.vertices,
        params.batches,
        params.batch_size,
        params.delete_fraction,
        params.graph_seed,
    );
    let order = model.order();

    let per_seed: Vec<(CellCounts, CellCounts, Option<GraphSnapshot>)> = (0..params.seeds)
        .into_par_iter()
        .map(|seed_index| {
            let corpus_seed = 0x5151_0000 + 2 * seed_index;
            let cfg = EngineConfig {
                corpus: CorpusConfig::new(
                    params.walks_per_vertex,
                    params.walk_len,
                    model,
                    corpus_seed,
                ),
                params: ChunkParams::default(),
                policy: MergePolicy::OnDemand,
            };
            let mut engine = WalkEngine::new(&edges, cfg).expect("seeded graph is valid");
            engine.generate().expect("generation succeeds");
            for batch in &batches {
                engine.apply_batch(batch).expect("seeded batches are valid");
            }
            let updated_walks: Vec<Vec<VertexId>> = engine
                .reconstruct_all()
                .expect("updated corpus reconstructs")
                .into_iter()
                .map(|(_, verts)| verts)
                .collect();

            let (scratch_snap, scratch_roster, _) = engine
                .regenerate_from_scratch(corpus_seed + 1)
                .expect("scratch regeneration succeeds");
            let empty_log = RewriteLog::default();
            let scratch_walks: Vec<Vec<VertexId>> = scratch_roster
                .live_walks()
                .map(|(w, _)| {
                    reconstruct_walk(&scratch_snap, w, &scratch_roster, &empty_log, params.walk_len)
                        .expect("scratch corpus reconstructs")
                })
                .collect();

            let mut updated = CellCounts::new();
            let mut scratch = CellCounts::new();
            accumulate_successors(&updated_walks, order, &mut updated);
            accumulate_successors(&scratch_walks, order, &mut scratch);
            let final_snapshot = (seed_index == 0).then(|| engine.acquire_snapshot());
            (updated, scratch, final_snapshot)
        })
        .collect();

    let mut updated = CellCounts::new();
    let mut scratch = CellCounts::new();
    let mut final_snapshot = None;
    for (u, s, snap) in per_seed {
        merge_counts(&mut updated, u);
        merge_counts(&mut scratch, s);
        if let Some(snap) = snap {
            final_snapshot = Some(snap);
        }
    }
    let final_snapshot = final_snapshot.expect("at least one seed ran");

    let mut max_tvd_updated = 0f64;
    let mut max_tvd_scratch = 0f64;
    let mut max_tvd_samples = (0u64, 0u64);
    let mut cells_judged = 0usize;
    let mut chi_cells = 0usize;
    let mut chi_passed = 0usize;
    for (cell, updated_counts) in &updated {
        let Some(scratch_counts) = scratch.get(cell) else {
            continue;
        };
        let n_updated: u64 = updated_counts.values().sum();
        let n_scratch: u64 = scratch_counts.values().sum();
        if n_updated < params.min_cell_samples || n_scratch < params.min_cell_samples {
            continue;
        }
        let (prev, cur) = *cell;
        let state = SamplerState {
            current: cur,
            previous: prev,
        };
        let reference = transition_distribution(&final_snapshot, &state, &model);
        if reference.is_empty() {
            continue;
        }
        cells_judged += 1;
        let tvd_updated = total_variation(updated_counts, &reference);
        if tvd_updated > max_tvd_updated {
            max_tvd_updated = tvd_updated;
            max_tvd_samples.0 = n_updated;
        }
        let tvd_scratch = total_variation(scratch_counts, &reference);
        if tvd_scratch > max_tvd_scratch {
            max_tvd_scratch = tvd_scratch;
            max_tvd_samples.1 = n_scratch;
        }
        if let Some((stat, df)) = chi_square_two_sample(updated_counts, scratch_counts) {
            chi_cells += 1;
            if stat <= chi_square_critical(df, params.chi_alpha) {
                chi_passed += 1;
            }
        }
    }
    ensure!(cells_judged > 0, "no cells reached the sample threshold");

    let chi_fraction = if chi_cells == 0 {
        1.0
    } else {
        chi_passed as f64 / chi_cells as f64
    };
    let pass = max_tvd_updated <= params.tvd_threshold
        && max_tvd_scratch <= params.tvd_threshold
        && chi_fraction >= params.chi_pass_fraction;
    Ok(ModelReport {
        model: match model {
            WalkModel::DeepWalk => "deepwalk".into(),
            WalkModel::Node2vec { p, q } => format!("node2vec(p={p},q={q})"),
            WalkModel::Ppr { alpha } => format!("ppr(alpha={alpha})"),
        },
        cells_judged,
        max_tvd_updated,
        max_tvd_scratch,
        max_tvd_samples,
        chi_cells,
        chi_passed,
        pass,
    })
}

pub fn run(params: &VerifyParams, models: &[WalkModel]) -> Result<VerifyReport> {
    let models = models
        .iter()
        .map(|m| run_model(params, *m))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { models })
}
