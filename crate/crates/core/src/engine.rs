//! Live engine handle: owns the current snapshot, the walk roster, and the
//! rewrite log, and orchestrates batch application end to end.
//!
//! Single writer, any number of readers: acquired snapshots are immutable
//! and remain readable while later batches are applied.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{
    generate_corpus, group_by_owner, reconstruct_walk, CorpusConfig, CorpusError, RewriteLog,
    SampledWalk, WalkRoster,
};
use crate::ctree::ChunkParams;
use crate::hybrid::{BatchError, BatchRejected, EdgeBatch, GraphSnapshot, Mav, VertexId, WalkId};
use crate::updater::{merge, rewalk_affected, MergePolicy};

#[derive(Debug, Clone, Error)]
pub enum EngineError {
    #[error(transparent)]
    Batch(#[from] BatchRejected),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] crate::hybrid::GraphError),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub corpus: CorpusConfig,
    pub params: ChunkParams,
    pub policy: MergePolicy,
}

/// Per-batch outcome and counters, one record per applied batch.
#[derive(Debug, Clone)]
pub struct BatchReport {
    pub epoch: u64,
    pub affected_walks: u64,
    /// Triplets accumulated by re-walks: sum of `walk_len - p_min`.
    pub insertions: u64,
    pub spawned_walks: u64,
    pub retired_walks: u64,
    pub skipped_retired: u64,
    pub padded_walks: u64,
    pub pmin_histogram: Vec<u64>,
    /// Affected-walk map after retiring walks rooted at removed vertices.
    pub mav: Mav,
    pub timings: BatchTimings,
    pub walk_store_bytes: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BatchTimings {
    /// Graph update plus affected-walk scan.
    pub apply_and_mav: Duration,
    pub rewalk: Duration,
    pub push: Duration,
    pub merge: Option<Duration>,
}

impl BatchTimings {
    /// Wall time of the update itself, excluding any merge.
    pub fn update_total(&self) -> Duration {
        self.apply_and_mav + self.rewalk + self.push
    }
}

pub struct WalkEngine {
    cfg: EngineConfig,
    snapshot: GraphSnapshot,
    roster: WalkRoster,
    log: RewriteLog,
    peak_walk_store_bytes: u64,
}

impl WalkEngine {
    pub fn new(edges: &[(VertexId, VertexId)], cfg: EngineConfig) -> Result<Self, BatchError> {
        let snapshot = GraphSnapshot::from_edges(edges, cfg.params)?;
        Ok(WalkEngine {
            cfg,
            snapshot,
            roster: WalkRoster::default(),
            log: RewriteLog::default(),
            peak_walk_store_bytes: 0,
        })
    }

    /// Generates the initial corpus: `walks_per_vertex` walks per vertex.
    pub fn generate(&mut self) -> Result<(), CorpusError> {
        self.snapshot = generate_corpus(&self.snapshot, &self.cfg.corpus, &mut self.roster)?;
        self.peak_walk_store_bytes = self
            .peak_walk_store_bytes
            .max(self.snapshot.walk_store_bytes());
        Ok(())
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn snapshot(&self) -> &GraphSnapshot {
        &self.snapshot
    }

    /// O(1) capture of the current state; later batches never affect it.
    pub fn acquire_snapshot(&self) -> GraphSnapshot {
        self.snapshot.clone()
    }

    pub fn roster(&self) -> &WalkRoster {
        &self.roster
    }

    pub fn rewrite_log(&self) -> &RewriteLog {
        &self.log
    }

    pub fn epoch(&self) -> u64 {
        self.snapshot.epoch
    }

    pub fn live_walk_count(&self) -> u64 {
        self.roster.live_count()
    }

    /// Applies one edge batch: updates the graph, retires walks rooted at
    /// removed vertices, re-walks everything the batch affected, spawns
    /// walks for new vertices, and merges if the policy fires.
    pub fn apply_batch(&mut self, batch: &EdgeBatch) -> Result<BatchReport, EngineError> {
        let cfg = self.cfg.corpus.clone();
        let t_apply = Instant::now();
        let outcome = self.snapshot.apply_edge_batch(
            batch,
            cfg.walk_len,
            &self.log,
            self.roster.next_walk_id(),
        )?;
        let epoch = outcome.snapshot.epoch;

        let mut retired_walks = 0u64;
        for &v in &outcome.removed {
            for w in self.roster.retire_rooted_at(v) {
                self.log.retire(w, epoch);
                retired_walks += 1;
            }
        }
        let mut mav = outcome.mav;
        let before = mav.len();
        mav.retain(|w, _| self.roster.is_live(*w));
        let skipped_retired = (before - mav.len()) as u64;
        if skipped_retired > 0 {
            log::warn!("batch {epoch}: skipped {skipped_retired} affected walks that were retired");
        }
        let apply_and_mav = t_apply.elapsed();

        let t_rewalk = Instant::now();
        let (mut sampled, stats) = rewalk_affected(
            &outcome.snapshot,
            &mav,
            &cfg,
            &self.roster,
            &mut self.log,
            epoch,
        )?;
        let (spawned, spawned_walks) =
            self.spawn_for_new_vertices(&outcome.snapshot, &outcome.added, epoch)?;
        sampled.extend(spawned);
        let rewalk = t_rewalk.elapsed();

        let t_push = Instant::now();
        let groups = group_by_owner(sampled);
        self.snapshot = outcome.snapshot.push_walk_versions(epoch, &groups)?;
        let push = t_push.elapsed();

        let walk_store_bytes = self.snapshot.walk_store_bytes();
        self.peak_walk_store_bytes = self.peak_walk_store_bytes.max(walk_store_bytes);

        let merge_time = if self.cfg.policy.fires(epoch) {
            let t = Instant::now();
            self.merge_now();
            Some(t.elapsed())
        } else {
            None
        };

        Ok(BatchReport {
            epoch,
            affected_walks: stats.affected_walks,
            insertions: stats.insertions,
            spawned_walks,
            retired_walks,
            skipped_retired,
            padded_walks: stats.padded_walks,
            pmin_histogram: stats.pmin_histogram,
            mav,
            timings: BatchTimings {
                apply_and_mav,
                rewalk,
                push,
                merge: merge_time,
            },
            walk_store_bytes: self.snapshot.walk_store_bytes(),
        })
    }

    fn spawn_for_new_vertices(
        &mut self,
        snapshot: &GraphSnapshot,
        added: &[VertexId],
        epoch: u64,
    ) -> Result<(Vec<SampledWalk>, u64), CorpusError> {
        if added.is_empty() {
            return Ok((Vec::new(), 0));
        }
        let cfg = &self.cfg.corpus;
        let mut assignments = Vec::new();
        for &v in added {
            for _ in 0..cfg.walks_per_vertex {
                assignments.push((self.roster.spawn(v), v));
            }
        }
        crate::codec::walk_key(self.roster.next_walk_id() - 1, cfg.walk_len - 1, cfg.walk_len)?;
        let sampled: Vec<SampledWalk> = assignments
            .par_iter()
            .map(|&(w, v)| crate::corpus::sample_walk_from(snapshot, cfg, w, epoch, 0, v, None))
            .collect::<Result<_, _>>()?;
        Ok((sampled, assignments.len() as u64))
    }

    /// Consolidates all walk-tree versions and clears the rewrite log.
    pub fn merge_now(&mut self) {
        self.snapshot = merge(&self.snapshot, self.cfg.corpus.walk_len, &self.log);
        self.log.clear();
    }

    pub fn reconstruct(&self, walk: WalkId) -> Result<Vec<VertexId>, CorpusError> {
        reconstruct_walk(
            &self.snapshot,
            walk,
            &self.roster,
            &self.log,
            self.cfg.corpus.walk_len,
        )
    }

    /// All live walks, reconstructed in walk-id order.
    pub fn reconstruct_all(&self) -> Result<Vec<(WalkId, Vec<VertexId>)>, CorpusError> {
        let live: Vec<(WalkId, VertexId)> = self.roster.live_walks().collect();
        live.par_iter()
            .map(|&(w, _)| self.reconstruct(w).map(|verts| (w, verts)))
            .collect()
    }

    /// Corpus dump: one `walk_id: v0 v1 ... v(l-1)` line per live walk.
    pub fn dump_corpus(&self, out: &mut impl Write) -> io::Result<()> {
        let walks = self
            .reconstruct_all()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        for (w, verts) in walks {
            write!(out, "{w}:")?;
            for v in verts {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn walk_store_bytes(&self) -> u64 {
        self.snapshot.walk_store_bytes()
    }

    pub fn graph_bytes(&self) -> u64 {
        self.snapshot.graph_bytes()
    }

    pub fn peak_walk_store_bytes(&self) -> u64 {
        self.peak_walk_store_bytes
    }

    /// Times regenerating the whole corpus from scratch on the current
    /// graph, as the throughput floor any incremental scheme must beat.
    /// Returns the fresh corpus state without touching the engine.
    pub fn regenerate_from_scratch(
        &self,
        seed: u64,
    ) -> Result<(GraphSnapshot, WalkRoster, Duration), CorpusError> {
        let stripped_entries: Vec<_> = self
            .snapshot
            .vertex_entries()
            .into_par_iter()
            .map(|(v, entry)| {
                (
                    v,
                    crate::hybrid::VertexEntry {
                        edge_tree: entry.edge_tree,
                        walk_versions: Vec::new(),
                        bounds: None,
                    },
                )
            })
            .collect();
        let stripped = self
            .snapshot
            .with_vertices(crate::pftree::Tree::from_sorted(stripped_entries), self.snapshot.epoch);
        let cfg = CorpusConfig {
            seed,
            ..self.cfg.corpus.clone()
        };
        let mut roster = WalkRoster::default();
        let t = Instant::now();
        let snapshot = generate_corpus(&stripped, &cfg, &mut roster)?;
        Ok((snapshot, roster, t.elapsed()))
    }
}
