//! Restart-walk PageRank estimation checked against a power-iteration
//! oracle, plus the static-versus-updating comparison across batches.

use std::collections::BTreeMap;

use anyhow::{ensure, Result};
use streamwalk::corpus::CorpusConfig;
use streamwalk::ctree::ChunkParams;
use streamwalk::engine::{EngineConfig, WalkEngine};
use streamwalk::hybrid::VertexId;
use streamwalk::models::WalkModel;
use streamwalk::updater::MergePolicy;

use crate::stats::{power_iteration_ppr, smape};
use crate::verify::{seeded_batches, seeded_graph};

#[derive(Debug, Clone)]
pub struct PprParams {
    pub vertices: u64,
    pub avg_degree: u64,
    pub walks_per_vertex: u32,
    pub walk_len: u64,
    pub alpha: f64,
    pub batches: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub top_k: usize,
    pub abs_tolerance: f64,
}

impl Default for PprParams {
    fn default() -> Self {
        PprParams {
            vertices: 100,
            avg_degree: 6,
            walks_per_vertex: 100,
            walk_len: 10,
            alpha: 0.2,
            batches: 5,
            batch_size: 100,
            seed: 4,
            top_k: 10,
            abs_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PprReport {
    pub top_k_max_abs_err: f64,
    pub smape_updating: f64,
    pub smape_static: f64,
}

impl PprReport {
    pub fn pass(&self, params: &PprParams) -> bool {
        self.top_k_max_abs_err <= params.abs_tolerance && self.smape_static > self.smape_updating
    }
}

/// Visit-frequency estimate over reconstructed restart walks. Padded tails
/// (the repeated vertex after an early restart) are excluded; the restart
/// vertex itself counts once.
pub fn visit_frequencies(walks: &[Vec<VertexId>]) -> BTreeMap<VertexId, f64> {
    let mut visits: BTreeMap<VertexId, u64> = BTreeMap::new();
    let mut total = 0u64;
    for verts in walks {
        for (i, &v) in verts.iter().enumerate() {
            if i > 0 && verts[i - 1] == v {
                break;
            }
            *visits.entry(v).or_insert(0) += 1;
            total += 1;
        }
    }
    visits
        .into_iter()
        .map(|(v, c)| (v, c as f64 / total as f64))
        .collect()
}

fn reconstruct_frequencies(engine: &WalkEngine) -> Result<BTreeMap<VertexId, f64>> {
    let walks: Vec<Vec<VertexId>> = engine
        .reconstruct_all()?
        .into_iter()
        .map(|(_, verts)| verts)
        .collect();
    Ok(visit_frequencies(&walks))
}

fn adjacency_of(engine: &WalkEngine) -> BTreeMap<VertexId, Vec<VertexId>> {
    let snapshot = engine.snapshot();
    snapshot
        .vertex_ids()
        .into_iter()
        .map(|v| (v, snapshot.neighbors(v).expect("listed vertex")))
        .collect()
}

pub fn max_abs_err_top_k(
    estimate: &BTreeMap<VertexId, f64>,
    oracle: &BTreeMap<VertexId, f64>,
    k: usize,
) -> f64 {
    let mut ranked: Vec<(VertexId, f64)> = oracle.iter().map(|(v, p)| (*v, *p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
        .iter()
        .take(k)
        .map(|(v, p)| (estimate.get(v).copied().unwrap_or(0.0) - p).abs())
        .fold(0.0, f64::max)
}

pub fn run(params: &PprParams) -> Result<PprReport> {
    let edges = seeded_graph(params.vertices, params.avg_degree, params.seed);
    let cfg = EngineConfig {
        corpus: CorpusConfig::new(
            params.walks_per_vertex,
            params.walk_len,
            WalkModel::Ppr {
                alpha: params.alpha,
            },
            params.seed ^ 0x9990_1111_2222_3333,
        ),
        params: ChunkParams::default(),
        policy: MergePolicy::OnDemand,
    };
    let mut engine = WalkEngine::new(&edges, cfg)?;
    engine.generate()?;

    // Estimator accuracy on the initial graph.
    let initial_estimate = reconstruct_frequencies(&engine)?;
    let initial_oracle = power_iteration_ppr(&adjacency_of(&engine), params.alpha, 1e-12, 500);
    let top_k_max_abs_err = max_abs_err_top_k(&initial_estimate, &initial_oracle, params.top_k);
    ensure!(
        (initial_oracle.values().sum::<f64>() - 1.0).abs() < 1e-6,
        "oracle scores must normalize"
    );

    // Stream batches; the static variant keeps the initial walks.
    let batches = seeded_batches(
        &edges,
        params.vertices,
        params.batches,
        params.batch_size,
        0.2,
        params.seed,
    );
    for batch in &batches {
        engine.apply_batch(batch)?;
    }
    let final_oracle = power_iteration_ppr(&adjacency_of(&engine), params.alpha, 1e-12, 500);
    let updating_estimate = reconstruct_frequencies(&engine)?;
    Ok(PprReport {
        top_k_max_abs_err,
        smape_updating: smape(&updating_estimate, &final_oracle),
        smape_static: smape(&initial_estimate, &final_oracle),
    })
}
