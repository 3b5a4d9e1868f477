//! Inverted-index baseline: walks kept as explicit vertex sequences plus a
//! vertex-to-walks index.
//!
//! Functionally equivalent to the hybrid-tree engine — same affected-walk
//! maps, and with the same seed the exact same corpora — which makes it the
//! cross-validation oracle at scale and the memory/throughput comparison
//! point.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::corpus::{sample_walk_from, CorpusConfig, CorpusError, SampledWalk, WalkRoster};
use crate::engine::EngineError;
use crate::hybrid::{
    BatchError, BatchRejected, EdgeBatch, EdgeOp, EdgeOpError, Mav, MavEntry, VertexId, WalkId,
};
use crate::models::NeighborAccess;

/// Adjacency view over the baseline's edge set; gives the samplers the same
/// sorted-neighbor semantics as the hybrid tree.
struct IiGraph<'a>(&'a BTreeMap<VertexId, BTreeSet<VertexId>>);

impl NeighborAccess for IiGraph<'_> {
    fn degree(&self, v: VertexId) -> Option<u64> {
        self.0.get(&v).map(|s| s.len() as u64)
    }
    fn neighbor_at(&self, v: VertexId, k: u64) -> Option<VertexId> {
        self.0.get(&v)?.iter().nth(k as usize).copied()
    }
    fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.0.get(&a).is_some_and(|s| s.contains(&b))
    }
}

#[derive(Debug, Clone)]
pub struct IiBatchReport {
    pub epoch: u64,
    pub mav: Mav,
    pub affected_walks: u64,
    pub insertions: u64,
    pub spawned_walks: u64,
    pub retired_walks: u64,
    pub wall: Duration,
}

pub struct IiEngine {
    cfg: CorpusConfig,
    adjacency: BTreeMap<VertexId, BTreeSet<VertexId>>,
    edge_count: u64,
    /// walk id -> vertex sequence; `None` once retired.
    walks: Vec<Option<Vec<VertexId>>>,
    /// vertex -> walk -> occurrence count (one entry per occurrence).
    index: HashMap<VertexId, HashMap<WalkId, u32>>,
    roster: WalkRoster,
    epoch: u64,
}

impl IiEngine {
    pub fn new(edges: &[(VertexId, VertexId)], cfg: CorpusConfig) -> Result<Self, BatchError> {
        let mut adjacency: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        let mut edge_count = 0;
        for &(a, b) in edges {
            if a == b {
                return Err(BatchError::SelfLoop(a));
            }
            if adjacency.entry(a).or_default().insert(b) {
                edge_count += 1;
            }
            adjacency.entry(b).or_default().insert(a);
        }
        Ok(IiEngine {
            cfg,
            adjacency,
            edge_count,
            walks: Vec::new(),
            index: HashMap::new(),
            roster: WalkRoster::default(),
            epoch: 0,
        })
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn vertex_count(&self) -> u64 {
        self.adjacency.len() as u64
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn live_walk_count(&self) -> u64 {
        self.roster.live_count()
    }

    pub fn walk_vertices(&self, w: WalkId) -> Option<&Vec<VertexId>> {
        self.walks.get(w as usize)?.as_ref()
    }

    pub fn generate(&mut self) -> Result<(), CorpusError> {
        if self.adjacency.is_empty() {
            return Err(CorpusError::EmptyGraph);
        }
        let starts: Vec<VertexId> = self.adjacency.keys().copied().collect();
        let mut assignments = Vec::new();
        for &v in &starts {
            for _ in 0..self.cfg.walks_per_vertex {
                assignments.push((self.roster.spawn(v), v));
            }
        }
        crate::codec::walk_key(
            self.roster.next_walk_id() - 1,
            self.cfg.walk_len - 1,
            self.cfg.walk_len,
        )?;
        let graph = IiGraph(&self.adjacency);
        let sampled: Vec<(WalkId, SampledWalk)> = assignments
            .par_iter()
            .map(|&(w, v)| {
                sample_walk_from(&graph, &self.cfg, w, self.epoch, 0, v, None).map(|s| (w, s))
            })
            .collect::<Result<_, _>>()?;
        for (w, s) in sampled {
            let seq: Vec<VertexId> = s.triplets.iter().map(|&(owner, _, _)| owner).collect();
            self.install_walk(w, seq);
        }
        Ok(())
    }

    fn install_walk(&mut self, w: WalkId, seq: Vec<VertexId>) {
        for &v in &seq {
            *self.index.entry(v).or_default().entry(w).or_insert(0) += 1;
        }
        if self.walks.len() <= w as usize {
            self.walks.resize(w as usize + 1, None);
        }
        self.walks[w as usize] = Some(seq);
    }

    fn unindex_positions(&mut self, w: WalkId, vertices: &[VertexId]) {
        for &v in vertices {
            if let Some(per_vertex) = self.index.get_mut(&v) {
                if let Some(count) = per_vertex.get_mut(&w) {
                    *count -= 1;
                    if *count == 0 {
                        per_vertex.remove(&w);
                    }
                }
                if per_vertex.is_empty() {
                    self.index.remove(&v);
                }
            }
        }
    }

    /// Affected-walk map via index lookup plus sequence scan for the first
    /// occurrence of each endpoint.
    fn collect_affected(&self, batch: &EdgeBatch) -> Mav {
        let mut sources = BTreeSet::new();
        for &(_, s, d) in batch.ops() {
            sources.insert(s);
            sources.insert(d);
        }
        let mut mav: Mav = BTreeMap::new();
        for s in sources {
            let Some(walks) = self.index.get(&s) else {
                continue;
            };
            for (&w, _) in walks {
                let seq = self.walks[w as usize]
                    .as_ref()
                    .expect("indexed walk is live");
                let position = seq
                    .iter()
                    .position(|&v| v == s)
                    .expect("indexed vertex occurs in walk") as u64;
                let candidate = MavEntry {
                    vertex: s,
                    position,
                };
                mav.entry(w)
                    .and_modify(|e| {
                        if candidate.position < e.position {
                            *e = candidate;
                        }
                    })
                    .or_insert(candidate);
            }
        }
        mav
    }

    pub fn apply_batch(&mut self, batch: &EdgeBatch) -> Result<IiBatchReport, EngineError> {
        let t0 = Instant::now();
        let mut errors = Vec::new();
        for &(op, s, d) in batch.ops() {
            let present = self.adjacency.get(&s).is_some_and(|n| n.contains(&d));
            match op {
                EdgeOp::Insert if present => errors.push(EdgeOpError::DuplicateInsert(s, d)),
                EdgeOp::Delete if !present => errors.push(EdgeOpError::MissingEdge(s, d)),
                _ => {}
            }
        }
        if !errors.is_empty() {
            return Err(BatchRejected(errors).into());
        }

        let mut mav = self.collect_affected(batch);

        // Vertex arrivals/departures follow the net effect of the batch, so
        // a vertex that swaps its last edge within one batch keeps its
        // identity (and its walks), matching the hybrid engine.
        let mut touched = BTreeSet::new();
        for &(_, s, d) in batch.ops() {
            touched.insert(s);
            touched.insert(d);
        }
        let present_before: BTreeSet<VertexId> = touched
            .iter()
            .copied()
            .filter(|v| self.adjacency.contains_key(v))
            .collect();
        for &(op, s, d) in batch.ops() {
            match op {
                EdgeOp::Insert => {
                    for (a, b) in [(s, d), (d, s)] {
                        self.adjacency.entry(a).or_default().insert(b);
                    }
                    self.edge_count += 1;
                }
                EdgeOp::Delete => {
                    for (a, b) in [(s, d), (d, s)] {
                        let entry = self.adjacency.get_mut(&a).expect("validated delete");
                        entry.remove(&b);
                        if entry.is_empty() {
                            self.adjacency.remove(&a);
                        }
                    }
                    self.edge_count -= 1;
                }
            }
        }
        let added: Vec<VertexId> = touched
            .iter()
            .copied()
            .filter(|v| !present_before.contains(v) && self.adjacency.contains_key(v))
            .collect();
        let removed: Vec<VertexId> = present_before
            .iter()
            .copied()
            .filter(|v| !self.adjacency.contains_key(v))
            .collect();
        self.epoch += 1;
        let epoch = self.epoch;

        let mut retired_walks = 0;
        for &v in &removed {
            for w in self.roster.retire_rooted_at(v) {
                if let Some(seq) = self.walks[w as usize].take() {
                    self.unindex_positions(w, &seq);
                }
                retired_walks += 1;
            }
        }
        mav.retain(|w, _| self.roster.is_live(*w));

        // Re-walk affected suffixes in parallel, then apply sequence and
        // index edits sequentially.
        let graph = IiGraph(&self.adjacency);
        let cfg = self.cfg.clone();
        let cfg = &cfg;
        let rewalks: Vec<(WalkId, u64, SampledWalk)> = mav
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(&w, entry)| {
                let seq = self.walks[w as usize].as_ref().expect("live affected walk");
                debug_assert_eq!(seq[entry.position as usize], entry.vertex);
                let prev = (cfg.model.order() == 2 && entry.position > 0)
                    .then(|| seq[entry.position as usize - 1]);
                sample_walk_from(&graph, cfg, w, epoch, entry.position, entry.vertex, prev)
                    .map(|s| (w, entry.position, s))
            })
            .collect::<Result<_, _>>()?;

        let mut insertions = 0u64;
        for (w, p_min, sampled) in rewalks {
            insertions += sampled.triplets.len() as u64;
            let new_suffix: Vec<VertexId> =
                sampled.triplets.iter().map(|&(owner, _, _)| owner).collect();
            let old_suffix: Vec<VertexId> =
                self.walks[w as usize].as_ref().expect("live walk")[p_min as usize..].to_vec();
            self.unindex_positions(w, &old_suffix);
            for &v in &new_suffix {
                *self.index.entry(v).or_default().entry(w).or_insert(0) += 1;
            }
            let seq = self.walks[w as usize].as_mut().expect("live walk");
            seq.truncate(p_min as usize);
            seq.extend_from_slice(&new_suffix);
        }

        // Fresh vertices spawn their own walks, like the primary engine.
        let mut spawned_walks = 0;
        if !added.is_empty() {
            let mut assignments = Vec::new();
            for &v in &added {
                for _ in 0..cfg.walks_per_vertex {
                    assignments.push((self.roster.spawn(v), v));
                }
            }
            crate::codec::walk_key(
                self.roster.next_walk_id() - 1,
                cfg.walk_len - 1,
                cfg.walk_len,
            )
            .map_err(CorpusError::from)?;
            let graph = IiGraph(&self.adjacency);
            let sampled: Vec<(WalkId, SampledWalk)> = assignments
                .par_iter()
                .map(|&(w, v)| {
                    sample_walk_from(&graph, cfg, w, epoch, 0, v, None).map(|s| (w, s))
                })
                .collect::<Result<_, _>>()?;
            for (w, s) in sampled {
                let seq: Vec<VertexId> = s.triplets.iter().map(|&(owner, _, _)| owner).collect();
                self.install_walk(w, seq);
                spawned_walks += 1;
            }
        }

        Ok(IiBatchReport {
            epoch,
            affected_walks: mav.len() as u64,
            insertions,
            spawned_walks,
            retired_walks,
            mav,
            wall: t0.elapsed(),
        })
    }

    /// Payload bytes: `(walk sequences, inverted index)`. Ids are counted at
    /// the same fixed width as the primary engine's pre-compression payload;
    /// the index costs one entry per vertex occurrence plus one key per
    /// indexed vertex.
    pub fn memory_bytes(&self) -> (u64, u64) {
        let walks: u64 = self
            .walks
            .iter()
            .flatten()
            .map(|seq| seq.len() as u64 * 8)
            .sum();
        let mut index = 0u64;
        for per_vertex in self.index.values() {
            index += 8; // vertex key
            index += per_vertex.values().map(|&c| c as u64).sum::<u64>() * 8;
        }
        (walks, index)
    }

    /// Bidirectional membership audit between walk table and index.
    pub fn check_index_consistency(&self) -> Result<(), String> {
        let mut expected: HashMap<VertexId, HashMap<WalkId, u32>> = HashMap::new();
        for (w, seq) in self.walks.iter().enumerate() {
            let Some(seq) = seq else { continue };
            for &v in seq {
                *expected.entry(v).or_default().entry(w as WalkId).or_insert(0) += 1;
            }
        }
        if expected.len() != self.index.len() {
            return Err(format!(
                "index keys {} vs expected {}",
                self.index.len(),
                expected.len()
            ));
        }
        for (v, walks) in &expected {
            if self.index.get(v) != Some(walks) {
                return Err(format!("index mismatch at vertex {v}"));
            }
        }
        Ok(())
    }

    pub fn live_walks(&self) -> impl Iterator<Item = (WalkId, &Vec<VertexId>)> + '_ {
        self.walks
            .iter()
            .enumerate()
            .filter_map(|(w, seq)| seq.as_ref().map(|s| (w as WalkId, s)))
    }

    /// Current undirected edge set.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count as usize);
        for (&v, neighbors) in &self.adjacency {
            for &d in neighbors.range(v..) {
                out.push((v, d));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctree::ChunkParams;
    use crate::engine::{EngineConfig, WalkEngine};
    use crate::models::WalkModel;
    use crate::rng::StepRng;
    use crate::updater::MergePolicy;

    fn cfg(seed: u64) -> CorpusConfig {
        CorpusConfig::new(3, 8, WalkModel::DeepWalk, seed)
    }

    fn random_edges(seed: u64, n: u64, count: usize) -> Vec<(u64, u64)> {
        let mut rng = StepRng::from_key(seed);
        let mut out = Vec::new();
        while out.len() < count {
            let a = rng.below(n);
            let b = rng.below(n);
            if a != b {
                out.push((a, b));
            }
        }
        out
    }

    #[test]
    fn memory_accounting_examples() {
        let engine = IiEngine::new(&[(0, 1)], cfg(1)).unwrap();
        assert_eq!(engine.memory_bytes(), (0, 0));

        let mut engine = IiEngine::new(&random_edges(5, 50, 200), cfg(1)).unwrap();
        engine.generate().unwrap();
        let (walks, index) = engine.memory_bytes();
        assert_eq!(walks, engine.live_walk_count() * 8 * 8);
        assert!(index >= walks, "index {index} < walks {walks}");
        engine.check_index_consistency().unwrap();
    }

    #[test]
    fn empty_batch_is_a_no_op() {
        let mut engine = IiEngine::new(&random_edges(6, 30, 100), cfg(2)).unwrap();
        engine.generate().unwrap();
        let before: Vec<_> = engine.live_walks().map(|(w, s)| (w, s.clone())).collect();
        let report = engine.apply_batch(&EdgeBatch::default()).unwrap();
        assert!(report.mav.is_empty());
        assert_eq!(report.insertions, 0);
        let after: Vec<_> = engine.live_walks().map(|(w, s)| (w, s.clone())).collect();
        assert_eq!(before, after);
    }

    /// A vertex that loses its last edge and gains a new one inside the
    /// same batch keeps its identity (and its walks) in both engines.
    #[test]
    fn last_edge_swap_keeps_vertex_walks() {
        let edges = [(1u64, 2u64), (2, 3), (7, 8)];
        let corpus_cfg = cfg(5);
        let mut ii = IiEngine::new(&edges, corpus_cfg.clone()).unwrap();
        ii.generate().unwrap();
        let mut primary = WalkEngine::new(
            &edges,
            EngineConfig {
                corpus: corpus_cfg,
                params: ChunkParams::default(),
                policy: MergePolicy::OnDemand,
            },
        )
        .unwrap();
        primary.generate().unwrap();

        // vertex 1 swaps its only edge; vertex 7 and 8 lose theirs for good
        let batch = EdgeBatch::new([
            (EdgeOp::Delete, 1, 2),
            (EdgeOp::Insert, 1, 3),
            (EdgeOp::Delete, 7, 8),
        ])
        .unwrap();
        let r1 = primary.apply_batch(&batch).unwrap();
        let r2 = ii.apply_batch(&batch).unwrap();
        assert_eq!(r1.mav, r2.mav);
        assert_eq!(r1.retired_walks, r2.retired_walks);
        assert_eq!(r1.spawned_walks, r2.spawned_walks);
        // walks rooted at 1 survived, walks rooted at 7/8 retired
        assert_eq!(
            r1.retired_walks,
            2 * primary.config().corpus.walks_per_vertex as u64
        );
        assert_eq!(r1.spawned_walks, 0);
        for (w, seq) in ii.live_walks() {
            assert_eq!(&primary.reconstruct(w).unwrap(), seq, "walk {w}");
        }
    }

    /// With identical seeds the two engines hold identical corpora and
    /// produce identical affected-walk maps on every batch.
    #[test]
    fn engines_agree_on_corpora_and_mavs() {
        let edges = random_edges(7, 80, 400);
        let corpus_cfg = cfg(42);
        let mut ii = IiEngine::new(&edges, corpus_cfg.clone()).unwrap();
        ii.generate().unwrap();
        let mut primary = WalkEngine::new(
            &edges,
            EngineConfig {
                corpus: corpus_cfg,
                params: ChunkParams::default(),
                policy: MergePolicy::OnDemand,
            },
        )
        .unwrap();
        primary.generate().unwrap();

        let compare = |primary: &WalkEngine, ii: &IiEngine| {
            for (w, seq) in ii.live_walks() {
                assert_eq!(&primary.reconstruct(w).unwrap(), seq, "walk {w}");
            }
            assert_eq!(primary.live_walk_count(), ii.live_walk_count());
        };
        compare(&primary, &ii);

        let mut rng = StepRng::from_key(9);
        let mut present: std::collections::BTreeSet<(u64, u64)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        for _ in 0..10 {
            let mut ops = Vec::new();
            let mut touched = std::collections::BTreeSet::new();
            while ops.len() < 12 {
                let a = rng.below(90);
                let b = rng.below(90);
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                if !touched.insert(key) {
                    continue;
                }
                if present.contains(&key) {
                    if rng.below(3) == 0 {
                        present.remove(&key);
                        ops.push((EdgeOp::Delete, a, b));
                    }
                } else {
                    present.insert(key);
                    ops.push((EdgeOp::Insert, a, b));
                }
            }
            let batch = EdgeBatch::new(ops).unwrap();
            let r1 = primary.apply_batch(&batch).unwrap();
            let r2 = ii.apply_batch(&batch).unwrap();
            assert_eq!(r1.mav, r2.mav, "MAV diverged at epoch {}", r1.epoch);
            assert_eq!(r1.insertions, r2.insertions);
            compare(&primary, &ii);
            ii.check_index_consistency().unwrap();
        }
    }
}
