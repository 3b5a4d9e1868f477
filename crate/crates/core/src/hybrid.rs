//! The tree-of-trees holding the graph and its walk corpus in one persistent
//! structure.
//!
//! Each vertex of the outer vertex-tree carries a compressed tree of its
//! neighbors (the edge-tree) and a stack of compressed walk-tree versions,
//! one per update epoch, plus cached bounds over the next-vertex ids stored
//! under it. Acquiring a snapshot is an O(1) root capture; applying a batch
//! produces a new snapshot and the map of affected walks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{self, OPERAND_LIMIT};
use crate::corpus::RewriteLog;
use crate::ctree::{CTree, ChunkParams, TreeError};
use crate::pftree::Tree;

pub type VertexId = u64;
pub type WalkId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} not found")]
    VertexNotFound(VertexId),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatchError {
    #[error("self-loop {0}-{0} rejected")]
    SelfLoop(VertexId),
    #[error("edge {0}-{1} both inserted and deleted in the same batch")]
    InsertDeleteConflict(VertexId, VertexId),
    #[error("vertex id {0} exceeds the 32-bit encoding cap")]
    VertexIdOverflow(VertexId),
}

/// Validation failure for a single op, reported with the offending edge.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EdgeOpError {
    #[error("insert of already-present edge {0}-{1}")]
    DuplicateInsert(VertexId, VertexId),
    #[error("delete of absent edge {0}-{1}")]
    MissingEdge(VertexId, VertexId),
}

/// A rejected batch: nothing was applied, every offending op is listed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("edge batch rejected ({} invalid ops)", .0.len())]
pub struct BatchRejected(pub Vec<EdgeOpError>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOp {
    Insert,
    Delete,
}

/// A deduplicated batch of undirected edge updates. Construction normalizes
/// endpoint order and rejects self-loops and insert/delete conflicts; each
/// edge expands into both directed updates at apply time.
#[derive(Debug, Clone, Default)]
pub struct EdgeBatch {
    ops: Vec<(EdgeOp, VertexId, VertexId)>,
}

impl EdgeBatch {
    pub fn new(raw: impl IntoIterator<Item = (EdgeOp, VertexId, VertexId)>) -> Result<Self, BatchError> {
        let mut seen: BTreeMap<(VertexId, VertexId), EdgeOp> = BTreeMap::new();
        let mut ops = Vec::new();
        for (op, a, b) in raw {
            if a == b {
                return Err(BatchError::SelfLoop(a));
            }
            for v in [a, b] {
                if v >= OPERAND_LIMIT {
                    return Err(BatchError::VertexIdOverflow(v));
                }
            }
            let (s, d) = (a.min(b), a.max(b));
            match seen.get(&(s, d)) {
                Some(prev) if *prev == op => continue,
                Some(_) => return Err(BatchError::InsertDeleteConflict(s, d)),
                None => {
                    seen.insert((s, d), op);
                    ops.push((op, s, d));
                }
            }
        }
        Ok(EdgeBatch { ops })
    }

    pub fn inserts(edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self, BatchError> {
        Self::new(edges.into_iter().map(|(a, b)| (EdgeOp::Insert, a, b)))
    }

    pub fn ops(&self) -> &[(EdgeOp, VertexId, VertexId)] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Per-vertex payload of the vertex-tree.
#[derive(Clone)]
pub struct VertexEntry {
    pub edge_tree: CTree,
    /// Walk-tree versions in ascending epoch order.
    pub walk_versions: Vec<(u64, CTree)>,
    /// Enclosing range over every next-vertex id stored under this vertex.
    /// Widened on insert, only recomputed tight by a merge; a loose range
    /// costs search work, never correctness.
    pub bounds: Option<(VertexId, VertexId)>,
}

impl VertexEntry {
    fn new(params: ChunkParams) -> Self {
        VertexEntry {
            edge_tree: CTree::new(params),
            walk_versions: Vec::new(),
            bounds: None,
        }
    }
}

/// First affected vertex of a walk and the position it occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MavEntry {
    pub vertex: VertexId,
    pub position: u64,
}

/// Map of affected walks: walk id to its first affected vertex and minimum
/// affected position.
pub type Mav = BTreeMap<WalkId, MavEntry>;

/// Result of applying an edge batch: the next snapshot, the affected-walk
/// map, and the vertices that appeared or dropped to degree zero.
pub struct BatchOutcome {
    pub snapshot: GraphSnapshot,
    pub mav: Mav,
    pub added: Vec<VertexId>,
    pub removed: Vec<VertexId>,
}

impl std::fmt::Debug for BatchOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BatchOutcome")
            .field("epoch", &self.snapshot.epoch)
            .field("affected", &self.mav.len())
            .field("added", &self.added)
            .field("removed", &self.removed)
            .finish()
    }
}

/// An immutable view of graph + corpus at one epoch. Cloning is an O(1)
/// root capture; later batches never disturb captured snapshots.
#[derive(Clone)]
pub struct GraphSnapshot {
    vertices: Tree<VertexId, VertexEntry>,
    params: ChunkParams,
    pub epoch: u64,
    pub edge_count: u64,
}

impl GraphSnapshot {
    pub fn new(params: ChunkParams) -> Self {
        GraphSnapshot {
            vertices: Tree::new(),
            params,
            epoch: 0,
            edge_count: 0,
        }
    }

    /// Bulk-loads an undirected edge list.
    pub fn from_edges(edges: &[(VertexId, VertexId)], params: ChunkParams) -> Result<Self, BatchError> {
        let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        let mut edge_count = 0u64;
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(BatchError::SelfLoop(a));
            }
            for v in [a, b] {
                if v >= OPERAND_LIMIT {
                    return Err(BatchError::VertexIdOverflow(v));
                }
            }
            if !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            edge_count += 1;
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let entries: Vec<(VertexId, VertexEntry)> = adjacency
            .into_par_iter()
            .map(|(v, mut nbrs)| {
                nbrs.sort_unstable();
                nbrs.dedup();
                let edge_tree = CTree::build(&nbrs, params).expect("sorted adjacency");
                (
                    v,
                    VertexEntry {
                        edge_tree,
                        walk_versions: Vec::new(),
                        bounds: None,
                    },
                )
            })
            .collect();
        Ok(GraphSnapshot {
            vertices: Tree::from_sorted(entries),
            params,
            epoch: 0,
            edge_count,
        })
    }

    pub fn params(&self) -> ChunkParams {
        self.params
    }

    pub fn vertex_count(&self) -> u64 {
        self.vertices.len() as u64
    }

    pub fn entry(&self, v: VertexId) -> Option<&VertexEntry> {
        self.vertices.get(&v)
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn degree(&self, v: VertexId) -> Option<u64> {
        self.entry(v).map(|e| e.edge_tree.len())
    }

    /// Sorted adjacency of `v`.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.entry(v)
            .map(|e| e.edge_tree.to_vec())
            .ok_or(GraphError::VertexNotFound(v))
    }

    /// k-th smallest neighbor of `v`.
    pub fn neighbor_at(&self, v: VertexId, k: u64) -> Option<VertexId> {
        self.entry(v)?.edge_tree.select(k)
    }

    pub fn has_edge(&self, s: VertexId, d: VertexId) -> bool {
        self.entry(s).is_some_and(|e| e.edge_tree.contains(d))
    }

    pub fn vertex_ids(&self) -> Vec<VertexId> {
        self.vertices.keys()
    }

    pub fn for_each_vertex(&self, f: &mut impl FnMut(VertexId, &VertexEntry)) {
        self.vertices.for_each(&mut |k, v| f(*k, v));
    }

    pub fn vertex_entries(&self) -> Vec<(VertexId, VertexEntry)> {
        self.vertices.entries()
    }

    pub(crate) fn with_vertices(&self, vertices: Tree<VertexId, VertexEntry>, epoch: u64) -> Self {
        GraphSnapshot {
            vertices,
            params: self.params,
            epoch,
            edge_count: self.edge_count,
        }
    }

    /// Applies a validated batch, producing the next-epoch snapshot and the
    /// map of affected walks. The batch is all-or-nothing: if any op fails
    /// validation against this snapshot the whole batch is rejected.
    ///
    /// The MAV is built from this (pre-update) snapshot: for every directed
    /// endpoint, each still-valid triplet in its walk-trees marks that walk
    /// affected at the triplet's position, keeping the minimum per walk.
    pub fn apply_edge_batch(
        &self,
        batch: &EdgeBatch,
        walk_len: u64,
        log: &RewriteLog,
        walk_id_bound: WalkId,
    ) -> Result<BatchOutcome, BatchRejected> {
        let mut errors = Vec::new();
        for &(op, s, d) in batch.ops() {
            match op {
                EdgeOp::Insert if self.has_edge(s, d) => {
                    errors.push(EdgeOpError::DuplicateInsert(s, d));
                }
                EdgeOp::Delete if !self.has_edge(s, d) => {
                    errors.push(EdgeOpError::MissingEdge(s, d));
                }
                _ => {}
            }
        }
        if !errors.is_empty() {
            return Err(BatchRejected(errors));
        }

        let mut per_source: BTreeMap<VertexId, (Vec<VertexId>, Vec<VertexId>)> = BTreeMap::new();
        let mut edge_delta = 0i64;
        for &(op, s, d) in batch.ops() {
            match op {
                EdgeOp::Insert => {
                    edge_delta += 1;
                    per_source.entry(s).or_default().0.push(d);
                    per_source.entry(d).or_default().0.push(s);
                }
                EdgeOp::Delete => {
                    edge_delta -= 1;
                    per_source.entry(s).or_default().1.push(d);
                    per_source.entry(d).or_default().1.push(s);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut added = Vec::new();
        let mut removed = Vec::new();
        for (&src, (ins, del)) in per_source.iter_mut() {
            ins.sort_unstable();
            del.sort_unstable();
            let existing = vertices.get(&src).cloned();
            let was_present = existing.is_some();
            let entry = existing.unwrap_or_else(|| VertexEntry::new(self.params));
            let edge_tree = entry
                .edge_tree
                .multi_insert(ins)
                .and_then(|t| t.multi_delete(del))
                .expect("validated batch endpoints are sorted and deduplicated");
            if edge_tree.is_empty() {
                if was_present {
                    vertices = vertices.remove(&src);
                    removed.push(src);
                }
            } else {
                if !was_present {
                    added.push(src);
                }
                vertices = vertices.insert(
                    src,
                    VertexEntry {
                        edge_tree,
                        ..entry
                    },
                );
            }
        }

        let mav = self.collect_affected(
            per_source.keys().copied().collect(),
            walk_len,
            log,
            walk_id_bound,
        );

        Ok(BatchOutcome {
            snapshot: GraphSnapshot {
                vertices,
                params: self.params,
                epoch: self.epoch + 1,
                edge_count: (self.edge_count as i64 + edge_delta) as u64,
            },
            mav,
            added,
            removed,
        })
    }

    /// Scans the walk-trees of every batch endpoint and keeps, per walk, the
    /// minimum affected position. Walk ids are dense, so each worker fills a
    /// flat slot array (position and vertex packed into one word) and the
    /// partials combine by minimum, which is order-independent and therefore
    /// deterministic.
    fn collect_affected(
        &self,
        sources: Vec<VertexId>,
        walk_len: u64,
        log: &RewriteLog,
        walk_id_bound: WalkId,
    ) -> Mav {
        const VACANT: u64 = u64::MAX;
        if walk_id_bound == 0 || sources.is_empty() {
            return Mav::new();
        }
        let chunk_size = sources
            .len()
            .div_ceil(rayon::current_num_threads().max(1) * 2)
            .max(1);
        let partials: Vec<Vec<u64>> = sources
            .par_chunks(chunk_size)
            .map(|chunk| {
                let mut slots = vec![VACANT; walk_id_bound as usize];
                for &s in chunk {
                    let Some(entry) = self.entry(s) else { continue };
                    for (epoch, wt) in &entry.walk_versions {
                        wt.iterate(&mut |value| {
                            let t = codec::decode_triplet(value, walk_len);
                            if !log.is_valid(t.walk_id, *epoch, t.position) {
                                return;
                            }
                            let pack = (t.position << 32) | s;
                            if let Some(slot) = slots.get_mut(t.walk_id as usize) {
                                if pack < *slot {
                                    *slot = pack;
                                }
                            }
                        });
                    }
                }
                slots
            })
            .collect();
        let mut merged = partials
            .into_iter()
            .reduce(|mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = (*x).min(y);
                }
                a
            })
            .unwrap_or_default();
        let mut mav = Mav::new();
        for (walk, &pack) in merged.iter().enumerate() {
            if pack != VACANT {
                mav.insert(
                    walk as WalkId,
                    MavEntry {
                        vertex: pack & u32::MAX as u64,
                        position: pack >> 32,
                    },
                );
            }
        }
        merged.clear();
        mav
    }

    /// Appends one walk-tree version under `v`. `next_min`/`next_max` are
    /// the extrema of the next-vertex ids inside `triplets`; the vertex
    /// bounds widen to cover them.
    pub fn push_walk_version(
        &self,
        v: VertexId,
        epoch: u64,
        triplets: &[u64],
        next_min: VertexId,
        next_max: VertexId,
    ) -> Result<Self, GraphError> {
        if triplets.is_empty() {
            return Ok(self.clone());
        }
        let mut entry = self
            .entry(v)
            .cloned()
            .ok_or(GraphError::VertexNotFound(v))?;
        let tree = CTree::build(triplets, self.params)?;
        entry.walk_versions.push((epoch, tree));
        entry.bounds = Some(match entry.bounds {
            Some((lo, hi)) => (lo.min(next_min), hi.max(next_max)),
            None => (next_min, next_max),
        });
        Ok(GraphSnapshot {
            vertices: self.vertices.insert(v, entry),
            params: self.params,
            epoch: self.epoch,
            edge_count: self.edge_count,
        })
    }

    /// Bulk form of [`Self::push_walk_version`]: one new version per listed
    /// vertex, all stamped with the same epoch. Version trees are built in
    /// parallel.
    pub fn push_walk_versions(
        &self,
        epoch: u64,
        groups: &[(VertexId, Vec<u64>, (VertexId, VertexId))],
    ) -> Result<Self, GraphError> {
        let built: Vec<(VertexId, CTree, (VertexId, VertexId))> = groups
            .par_iter()
            .filter(|(_, triplets, _)| !triplets.is_empty())
            .map(|(v, triplets, bounds)| {
                CTree::build(triplets, self.params).map(|t| (*v, t, *bounds))
            })
            .collect::<Result<_, _>>()?;
        let mut vertices = self.vertices.clone();
        for (v, tree, (next_min, next_max)) in built {
            let mut entry = vertices
                .get(&v)
                .cloned()
                .ok_or(GraphError::VertexNotFound(v))?;
            entry.walk_versions.push((epoch, tree));
            entry.bounds = Some(match entry.bounds {
                Some((lo, hi)) => (lo.min(next_min), hi.max(next_max)),
                None => (next_min, next_max),
            });
            vertices = vertices.insert(v, entry);
        }
        Ok(GraphSnapshot {
            vertices,
            params: self.params,
            epoch: self.epoch,
            edge_count: self.edge_count,
        })
    }

    /// Payload bytes of all walk-tree versions.
    pub fn walk_store_bytes(&self) -> u64 {
        let mut total = 0;
        self.for_each_vertex(&mut |_, e| {
            for (_, wt) in &e.walk_versions {
                total += wt.payload_bytes();
            }
        });
        total
    }

    /// Payload bytes of the adjacency structure.
    pub fn graph_bytes(&self) -> u64 {
        let mut total = 0;
        self.for_each_vertex(&mut |_, e| total += e.edge_tree.payload_bytes());
        total
    }

    /// Byte stream of every vertex's walk-tree versions in vertex order;
    /// lets walk stores be compared byte-for-byte.
    pub fn walk_store_snapshot(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.for_each_vertex(&mut |v, e| {
            out.extend_from_slice(&v.to_le_bytes());
            out.extend_from_slice(&(e.walk_versions.len() as u32).to_le_bytes());
            for (_, wt) in &e.walk_versions {
                wt.write_snapshot(&mut out).expect("writing to Vec cannot fail");
            }
        });
        out
    }

    /// Largest decoded chunk length across all walk-tree versions.
    pub fn max_walk_chunk_len(&self) -> u32 {
        let mut max = 0;
        self.for_each_vertex(&mut |_, e| {
            for (_, wt) in &e.walk_versions {
                max = max.max(wt.max_chunk_len());
            }
        });
        max
    }
}
