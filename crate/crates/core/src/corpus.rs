//! Walk-corpus lifecycle on top of the hybrid tree: initial generation, the
//! range-pruned next-vertex search, full-walk reconstruction, and the
//! validity filter that arbitrates between unmerged walk-tree versions.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{self, CodecError};
use crate::hybrid::{GraphError, GraphSnapshot, VertexId, WalkId};
use crate::models::{sample_next, NeighborAccess, SamplerState, Step, WalkModel};
use crate::rng::StepRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {0} not found")]
    VertexNotFound(VertexId),
    #[error("walk {0} is not live")]
    WalkNotLive(WalkId),
    #[error("walk {walk} has no valid triplet at position {position}")]
    BrokenChain { walk: WalkId, position: u64 },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub walks_per_vertex: u32,
    pub walk_len: u64,
    pub model: WalkModel,
    pub seed: u64,
}

impl CorpusConfig {
    pub fn new(walks_per_vertex: u32, walk_len: u64, model: WalkModel, seed: u64) -> Self {
        assert!(walks_per_vertex >= 1 && walk_len >= 1);
        model.validate().expect("valid walk model");
        CorpusConfig {
            walks_per_vertex,
            walk_len,
            model,
            seed,
        }
    }
}

/// Start-vertex registry. Walk ids are dense and never reused; retired
/// walks keep their slot with the start cleared.
#[derive(Debug, Clone, Default)]
pub struct WalkRoster {
    starts: Vec<Option<VertexId>>,
    rooted: HashMap<VertexId, Vec<WalkId>>,
    live: u64,
}

impl WalkRoster {
    pub fn spawn(&mut self, start: VertexId) -> WalkId {
        let id = self.starts.len() as WalkId;
        self.starts.push(Some(start));
        self.rooted.entry(start).or_default().push(id);
        self.live += 1;
        id
    }

    pub fn start_of(&self, walk: WalkId) -> Option<VertexId> {
        self.starts.get(walk as usize).copied().flatten()
    }

    pub fn is_live(&self, walk: WalkId) -> bool {
        self.start_of(walk).is_some()
    }

    /// Retires every walk rooted at `v`; returns their ids in ascending
    /// order.
    pub fn retire_rooted_at(&mut self, v: VertexId) -> Vec<WalkId> {
        let walks = self.rooted.remove(&v).unwrap_or_default();
        for &w in &walks {
            if self.starts[w as usize].take().is_some() {
                self.live -= 1;
            }
        }
        walks
    }

    pub fn live_count(&self) -> u64 {
        self.live
    }

    pub fn next_walk_id(&self) -> WalkId {
        self.starts.len() as WalkId
    }

    pub fn live_walks(&self) -> impl Iterator<Item = (WalkId, VertexId)> + '_ {
        self.starts
            .iter()
            .enumerate()
            .filter_map(|(w, s)| s.map(|start| (w as WalkId, start)))
    }
}

/// Epoch-stamped cut positions per rewritten walk. A triplet of walk `w`
/// stored in a version of epoch `e` is valid iff no entry `(e', c)` with
/// `e' > e` has `c <= position`. Recording a cut prunes older entries at or
/// above it, so the per-walk list keeps strictly decreasing cuts.
#[derive(Debug, Clone, Default)]
pub struct RewriteLog {
    cuts: HashMap<WalkId, Vec<(u64, u64)>>,
}

impl RewriteLog {
    pub fn record(&mut self, walk: WalkId, epoch: u64, cut: u64) {
        let list = self.cuts.entry(walk).or_default();
        list.retain(|&(_, c)| c < cut);
        list.push((epoch, cut));
    }

    /// Marks every position of `walk` stale; used when a walk is retired.
    pub fn retire(&mut self, walk: WalkId, epoch: u64) {
        self.record(walk, epoch, 0);
    }

    pub fn is_valid(&self, walk: WalkId, stored_epoch: u64, position: u64) -> bool {
        match self.cuts.get(&walk) {
            None => true,
            Some(list) => !list
                .iter()
                .any(|&(e, c)| e > stored_epoch && c <= position),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn clear(&mut self) {
        self.cuts.clear();
    }

    pub fn rewritten_walks(&self) -> usize {
        self.cuts.len()
    }
}

/// Instrumentation from one next-vertex search.
#[derive(Debug, Clone, Copy, Default)]
pub struct FindNextStats {
    /// Elements decompressed across all scanned versions.
    pub decoded: u64,
    pub versions_scanned: u32,
}

/// Looks up the successor of walk `w` at `position`, given that the vertex
/// at that position is `v`.
///
/// Builds the search range from the vertex's next-vertex bounds and range-
/// scans the walk-tree versions newest first, skipping chunks whose cached
/// extrema fall outside the range. Returns `None` when the vertex's trees
/// hold no valid triplet for `(w, position)`.
pub fn find_next(
    snapshot: &GraphSnapshot,
    v: VertexId,
    walk: WalkId,
    position: u64,
    walk_len: u64,
    log: &RewriteLog,
) -> Result<Option<VertexId>, CorpusError> {
    find_next_with_stats(snapshot, v, walk, position, walk_len, log).map(|(next, _)| next)
}

/// [`find_next`] with decode counters, for output-sensitivity checks.
pub fn find_next_with_stats(
    snapshot: &GraphSnapshot,
    v: VertexId,
    walk: WalkId,
    position: u64,
    walk_len: u64,
    log: &RewriteLog,
) -> Result<(Option<VertexId>, FindNextStats), CorpusError> {
    let entry = snapshot.entry(v).ok_or(CorpusError::VertexNotFound(v))?;
    let mut stats = FindNextStats::default();
    let Some((lo, hi)) = entry.bounds else {
        return Ok((None, stats));
    };
    let key = codec::walk_key(walk, position, walk_len)?;
    let lb = codec::szudzik_pair(key, lo)?;
    let ub = codec::szudzik_pair(key, hi)?;
    for (epoch, wt) in entry.walk_versions.iter().rev() {
        stats.versions_scanned += 1;
        let mut hit: Option<VertexId> = None;
        let range = wt.range_iterate(lb, ub, &mut |value| {
            let t = codec::decode_triplet(value, walk_len);
            if t.walk_id == walk && t.position == position {
                hit = Some(t.next_vertex);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        stats.decoded += range.decoded;
        if let Some(next) = hit {
            // A newer version shadows all older copies of this coordinate;
            // if the newest copy is stale, the live one is stored under a
            // different vertex and this vertex has no valid answer.
            let next = log.is_valid(walk, *epoch, position).then_some(next);
            return Ok((next, stats));
        }
    }
    Ok((None, stats))
}

/// Rebuilds the vertex sequence of a live walk by chasing next-vertex
/// triplets from its start, and checks the terminal self-reference.
pub fn reconstruct_walk(
    snapshot: &GraphSnapshot,
    walk: WalkId,
    roster: &WalkRoster,
    log: &RewriteLog,
    walk_len: u64,
) -> Result<Vec<VertexId>, CorpusError> {
    let start = roster.start_of(walk).ok_or(CorpusError::WalkNotLive(walk))?;
    let mut vertices = Vec::with_capacity(walk_len as usize);
    vertices.push(start);
    let mut cur = start;
    for position in 0..walk_len - 1 {
        let next = find_next(snapshot, cur, walk, position, walk_len, log)?
            .ok_or(CorpusError::BrokenChain { walk, position })?;
        vertices.push(next);
        cur = next;
    }
    let terminal = find_next(snapshot, cur, walk, walk_len - 1, walk_len, log)?;
    if terminal != Some(cur) {
        return Err(CorpusError::BrokenChain {
            walk,
            position: walk_len - 1,
        });
    }
    Ok(vertices)
}

/// One sampled walk flattened to owner-grouped storage units.
pub struct SampledWalk {
    /// `(owning vertex, encoded triplet, next vertex)` per position.
    pub triplets: Vec<(VertexId, u64, VertexId)>,
    /// Set when the walk hit a dead end or restarted early and the rest of
    /// the positions were padded with terminal triplets.
    pub padded: bool,
}

/// Samples positions `from..walk_len` of a walk whose vertex at `from` is
/// `cur`. Every position gets exactly one triplet; the final one (and every
/// padded one) is self-referencing.
pub fn sample_walk_from<G: NeighborAccess>(
    graph: &G,
    cfg: &CorpusConfig,
    walk: WalkId,
    epoch: u64,
    from: u64,
    cur: VertexId,
    prev: Option<VertexId>,
) -> Result<SampledWalk, CorpusError> {
    let l = cfg.walk_len;
    debug_assert!(from < l);
    let mut triplets = Vec::with_capacity((l - from) as usize);
    let mut cur = cur;
    let mut prev = prev;
    let mut p = from;
    while p + 1 < l {
        let mut rng = StepRng::for_step(cfg.seed, walk, epoch, p);
        let state = SamplerState {
            current: cur,
            previous: prev,
        };
        match sample_next(graph, &state, &cfg.model, &mut rng) {
            Step::Next(next) => {
                triplets.push((cur, encode(walk, p, next, l)?, next));
                prev = Some(cur);
                cur = next;
                p += 1;
            }
            Step::Stop | Step::DeadEnd => {
                for pp in p..l {
                    triplets.push((cur, encode(walk, pp, cur, l)?, cur));
                }
                return Ok(SampledWalk {
                    triplets,
                    padded: true,
                });
            }
        }
    }
    triplets.push((cur, encode(walk, l - 1, cur, l)?, cur));
    Ok(SampledWalk {
        triplets,
        padded: false,
    })
}

fn encode(walk: WalkId, position: u64, next: VertexId, len: u64) -> Result<u64, CodecError> {
    codec::encode_triplet(
        &codec::WalkTriplet {
            walk_id: walk,
            position,
            next_vertex: next,
        },
        len,
    )
}

/// Per-vertex insertion groups: sorted triplet values plus next-vertex
/// extrema, ready for a bulk version push.
pub type InsertionGroups = Vec<(VertexId, Vec<u64>, (VertexId, VertexId))>;

/// Groups sampled triplets by owning vertex and sorts each group.
pub fn group_by_owner(walks: impl IntoIterator<Item = SampledWalk>) -> InsertionGroups {
    let mut acc: HashMap<VertexId, (Vec<u64>, (VertexId, VertexId))> = HashMap::new();
    for walk in walks {
        for (owner, value, next) in walk.triplets {
            let slot = acc
                .entry(owner)
                .or_insert_with(|| (Vec::new(), (next, next)));
            slot.0.push(value);
            slot.1 .0 = slot.1 .0.min(next);
            slot.1 .1 = slot.1 .1.max(next);
        }
    }
    let mut groups: InsertionGroups = acc
        .into_iter()
        .map(|(v, (values, bounds))| (v, values, bounds))
        .collect();
    groups.par_iter_mut().for_each(|(_, values, _)| {
        values.sort_unstable();
        debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
    });
    groups.sort_unstable_by_key(|(v, _, _)| *v);
    groups
}

/// Generates `walks_per_vertex` fresh walks of length `walk_len` rooted at
/// every vertex and stores them as the snapshot-epoch walk-tree version.
pub fn generate_corpus(
    snapshot: &GraphSnapshot,
    cfg: &CorpusConfig,
    roster: &mut WalkRoster,
) -> Result<GraphSnapshot, CorpusError> {
    if snapshot.vertex_count() == 0 {
        return Err(CorpusError::EmptyGraph);
    }
    let epoch = snapshot.epoch;
    let mut assignments = Vec::with_capacity(
        snapshot.vertex_count() as usize * cfg.walks_per_vertex as usize,
    );
    for v in snapshot.vertex_ids() {
        for _ in 0..cfg.walks_per_vertex {
            assignments.push((roster.spawn(v), v));
        }
    }
    // The largest walk key must stay below the pairing operand cap.
    codec::walk_key(roster.next_walk_id() - 1, cfg.walk_len - 1, cfg.walk_len)?;

    let sampled: Vec<SampledWalk> = assignments
        .into_par_iter()
        .map(|(walk, start)| sample_walk_from(snapshot, cfg, walk, epoch, 0, start, None))
        .collect::<Result<_, _>>()?;
    let groups = group_by_owner(sampled);
    Ok(snapshot.push_walk_versions(epoch, &groups)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctree::ChunkParams;

    fn cfg(n_w: u32, l: u64, seed: u64) -> CorpusConfig {
        CorpusConfig::new(n_w, l, WalkModel::DeepWalk, seed)
    }

    fn snap(edges: &[(u64, u64)]) -> GraphSnapshot {
        GraphSnapshot::from_edges(edges, ChunkParams::default()).unwrap()
    }

    #[test]
    fn rewrite_log_validity_rules() {
        let mut log = RewriteLog::default();
        assert!(log.is_valid(7, 0, 3));
        log.record(7, 3, 5);
        // positions below the cut stay valid, the rest only in the epoch
        // that wrote them or later
        assert!(log.is_valid(7, 0, 4));
        assert!(!log.is_valid(7, 0, 5));
        assert!(!log.is_valid(7, 0, 9));
        assert!(log.is_valid(7, 3, 9));

        log.record(7, 6, 2);
        assert!(log.is_valid(7, 0, 1));
        assert!(!log.is_valid(7, 0, 2));
        assert!(!log.is_valid(7, 3, 5));
        assert!(log.is_valid(7, 6, 2));

        // later cut above an earlier one: both stay in force
        let mut log = RewriteLog::default();
        log.record(9, 3, 5);
        log.record(9, 7, 8);
        assert!(log.is_valid(9, 3, 6));
        assert!(!log.is_valid(9, 3, 9));
        assert!(!log.is_valid(9, 0, 6));
        assert!(log.is_valid(9, 7, 9));
    }

    #[test]
    fn roster_spawn_and_retire() {
        let mut roster = WalkRoster::default();
        let a = roster.spawn(10);
        let b = roster.spawn(10);
        let c = roster.spawn(11);
        assert_eq!((a, b, c), (0, 1, 2));
        assert_eq!(roster.live_count(), 3);
        assert_eq!(roster.start_of(1), Some(10));
        let retired = roster.retire_rooted_at(10);
        assert_eq!(retired, vec![0, 1]);
        assert_eq!(roster.live_count(), 1);
        assert!(!roster.is_live(0));
        assert!(roster.is_live(2));
        // ids are never reused
        assert_eq!(roster.spawn(12), 3);
    }

    /// Single-position walks are just their terminal triplet.
    #[test]
    fn l1_corpus_is_all_terminals() {
        let s = snap(&[(0, 1), (1, 2)]);
        let mut roster = WalkRoster::default();
        let s = generate_corpus(&s, &cfg(1, 1, 5), &mut roster).unwrap();
        let log = RewriteLog::default();
        for v in s.vertex_ids() {
            let entry = s.entry(v).unwrap();
            assert_eq!(entry.walk_versions.len(), 1);
            assert_eq!(entry.walk_versions[0].1.len(), 1);
        }
        for (w, start) in roster.live_walks() {
            assert_eq!(
                reconstruct_walk(&s, w, &roster, &log, 1).unwrap(),
                vec![start]
            );
        }
    }

    /// The worked corpus example: walk 0 visits v0, v1, v3, v5, v4 with
    /// l = 5. Its triplets sit under the visited vertices; chasing them via
    /// the range search reproduces the walk.
    #[test]
    fn worked_example_walk_round_trip() {
        let l = 5;
        let s = snap(&[
            (1, 0),
            (1, 2),
            (1, 3),
            (3, 5),
            (5, 2),
            (5, 4),
            (5, 7),
            (4, 7),
        ]);
        let seq = [0u64, 1, 3, 5, 4];
        let mut roster = WalkRoster::default();
        let w = roster.spawn(seq[0]);
        let mut cur = s;
        for (p, &v) in seq.iter().enumerate() {
            let next = *seq.get(p + 1).unwrap_or(&v);
            let value = encode(w, p as u64, next, l).unwrap();
            cur = cur
                .push_walk_version(v, 0, &[value], next, next)
                .unwrap();
        }
        let log = RewriteLog::default();
        assert_eq!(find_next(&cur, 0, w, 0, l, &log).unwrap(), Some(1));
        assert_eq!(find_next(&cur, 1, w, 1, l, &log).unwrap(), Some(3));
        assert_eq!(find_next(&cur, 3, w, 2, l, &log).unwrap(), Some(5));
        assert_eq!(find_next(&cur, 5, w, 3, l, &log).unwrap(), Some(4));
        // terminal self-reference
        assert_eq!(find_next(&cur, 4, w, 4, l, &log).unwrap(), Some(4));
        assert_eq!(
            reconstruct_walk(&cur, w, &roster, &log, l).unwrap(),
            seq.to_vec()
        );
    }

    #[test]
    fn find_next_on_empty_walk_tree_is_null() {
        let s = snap(&[(0, 1)]);
        let log = RewriteLog::default();
        assert_eq!(find_next(&s, 0, 0, 0, 5, &log).unwrap(), None);
        assert!(matches!(
            find_next(&s, 42, 0, 0, 5, &log),
            Err(CorpusError::VertexNotFound(42))
        ));
    }

    #[test]
    fn generated_corpus_is_edge_valid() {
        let mut edges = Vec::new();
        let mut rng = StepRng::from_key(31);
        for _ in 0..3000 {
            let a = rng.below(1000);
            let b = rng.below(1000);
            if a != b {
                edges.push((a, b));
            }
        }
        let s = snap(&edges);
        let c = cfg(2, 8, 77);
        let mut roster = WalkRoster::default();
        let s = generate_corpus(&s, &c, &mut roster).unwrap();
        let log = RewriteLog::default();
        assert_eq!(roster.live_count(), s.vertex_count() * 2);
        for (w, start) in roster.live_walks() {
            let verts = reconstruct_walk(&s, w, &roster, &log, c.walk_len).unwrap();
            assert_eq!(verts.len() as u64, c.walk_len);
            assert_eq!(verts[0], start);
            for pair in verts.windows(2) {
                if pair[0] == pair[1] {
                    continue; // padded tail
                }
                assert!(s.has_edge(pair[0], pair[1]), "missing edge {pair:?}");
            }
        }
    }

    /// Brute-force oracle: decode every version fully, filter by validity,
    /// pick the match.
    fn oracle_find(
        s: &GraphSnapshot,
        v: u64,
        w: u64,
        p: u64,
        l: u64,
        log: &RewriteLog,
    ) -> Option<u64> {
        let entry = s.entry(v)?;
        let mut best: Option<(u64, u64)> = None;
        for (epoch, wt) in &entry.walk_versions {
            wt.iterate(&mut |value| {
                let t = codec::decode_triplet(value, l);
                if t.walk_id == w
                    && t.position == p
                    && log.is_valid(w, *epoch, p)
                    && best.map_or(true, |(e, _)| *epoch >= e)
                {
                    best = Some((*epoch, t.next_vertex));
                }
            });
        }
        best.map(|(_, next)| next)
    }

    #[test]
    fn find_next_matches_full_decode_oracle() {
        let mut edges = Vec::new();
        let mut rng = StepRng::from_key(41);
        for _ in 0..800 {
            let a = rng.below(200);
            let b = rng.below(200);
            if a != b {
                edges.push((a, b));
            }
        }
        let s = snap(&edges);
        let c = cfg(3, 10, 13);
        let mut roster = WalkRoster::default();
        let mut s = generate_corpus(&s, &c, &mut roster).unwrap();
        let mut log = RewriteLog::default();

        // fabricate two rewrite epochs to create multi-version trees
        for epoch in 1..3u64 {
            let mut rewrites: Vec<(u64, u64)> = Vec::new();
            for w in 0..roster.next_walk_id() {
                if rng.below(4) == 0 && roster.is_live(w) {
                    rewrites.push((w, rng.below(c.walk_len)));
                }
            }
            let mut sampled = Vec::new();
            for &(w, p_min) in &rewrites {
                let verts = reconstruct_walk(&s, w, &roster, &log, c.walk_len).unwrap();
                let sw = sample_walk_from(
                    &s,
                    &c,
                    w,
                    epoch,
                    p_min,
                    verts[p_min as usize],
                    (p_min > 0).then(|| verts[p_min as usize - 1]),
                )
                .unwrap();
                sampled.push(sw);
            }
            for &(w, p_min) in &rewrites {
                log.record(w, epoch, p_min);
            }
            let groups = group_by_owner(sampled);
            s = s.push_walk_versions(epoch, &groups).unwrap();
        }

        let vertices = s.vertex_ids();
        for i in 0..4000 {
            let v = vertices[(rng.below(vertices.len() as u64)) as usize];
            let w = rng.below(roster.next_walk_id() + 3);
            let p = rng.below(c.walk_len);
            let got = find_next(&s, v, w, p, c.walk_len, &log).unwrap();
            let want = oracle_find(&s, v, w, p, c.walk_len, &log);
            assert_eq!(got, want, "query {i}: v={v} w={w} p={p}");
        }

        // every live walk still reconstructs and has exactly one valid
        // triplet per position across all versions
        let mut per_coord: HashMap<(u64, u64), u64> = HashMap::new();
        s.for_each_vertex(&mut |_, entry| {
            for (epoch, wt) in &entry.walk_versions {
                wt.iterate(&mut |value| {
                    let t = codec::decode_triplet(value, c.walk_len);
                    if log.is_valid(t.walk_id, *epoch, t.position) && roster.is_live(t.walk_id) {
                        *per_coord.entry((t.walk_id, t.position)).or_insert(0) += 1;
                    }
                });
            }
        });
        for ((w, p), count) in per_coord {
            assert_eq!(count, 1, "walk {w} position {p} has {count} valid triplets");
        }
    }
}
