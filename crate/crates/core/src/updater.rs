//! Batched walk maintenance: translating the affected-walk map into parallel
//! re-walks, and the merge that consolidates walk-tree versions.

use rayon::prelude::*;

use crate::codec;
use crate::corpus::{
    find_next, sample_walk_from, CorpusConfig, CorpusError, RewriteLog, SampledWalk, WalkRoster,
};
use crate::ctree::CTree;
use crate::hybrid::{GraphSnapshot, Mav, VertexEntry};
use crate::pftree::Tree;

/// When to consolidate walk-tree versions. Merging late trades memory for
/// throughput; merging every batch keeps the store minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergePolicy {
    OnDemand,
    Eager,
    EveryK(u64),
}

impl MergePolicy {
    pub fn fires(&self, epoch: u64) -> bool {
        match *self {
            MergePolicy::OnDemand => false,
            MergePolicy::Eager => true,
            MergePolicy::EveryK(k) => epoch % k.max(1) == 0,
        }
    }
}

/// Counters from one re-walk pass.
#[derive(Debug, Clone, Default)]
pub struct RewalkStats {
    pub affected_walks: u64,
    /// Total triplets accumulated: sum of `walk_len - p_min` over affected
    /// walks.
    pub insertions: u64,
    pub padded_walks: u64,
    /// Histogram of minimum affected positions, indexed by position.
    pub pmin_histogram: Vec<u64>,
}

/// Summary of an affected-walk map, reported per batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MavStats {
    pub affected_walks: u64,
    /// Accumulator size: sum of `walk_len - p_min`.
    pub insertion_total: u64,
    pub pmin_histogram: Vec<u64>,
}

pub fn mav_stats(mav: &Mav, walk_len: u64) -> MavStats {
    let mut histogram = vec![0u64; walk_len as usize];
    let mut insertion_total = 0;
    for entry in mav.values() {
        histogram[entry.position as usize] += 1;
        insertion_total += walk_len - entry.position;
    }
    MavStats {
        affected_walks: mav.len() as u64,
        insertion_total,
        pmin_histogram: histogram,
    }
}

/// Re-samples every affected walk from its minimum affected position.
///
/// The vertex at `p_min` is kept; positions above it are drawn fresh on the
/// updated snapshot. Second-order models recover the previous vertex by
/// reconstructing the still-valid walk prefix. Sampling runs in parallel;
/// each walk's cut is recorded in the rewrite log afterwards, which
/// logically evicts the stale suffix triplets until a merge removes them
/// physically.
pub fn rewalk_affected(
    snapshot: &GraphSnapshot,
    mav: &Mav,
    cfg: &CorpusConfig,
    roster: &WalkRoster,
    log: &mut RewriteLog,
    epoch: u64,
) -> Result<(Vec<SampledWalk>, RewalkStats), CorpusError> {
    let entries: Vec<(u64, crate::hybrid::MavEntry)> =
        mav.iter().map(|(w, e)| (*w, *e)).collect();
    let needs_prev = cfg.model.order() == 2;
    let sampled: Vec<SampledWalk> = entries
        .par_iter()
        .map(|&(walk, entry)| {
            let prev = if needs_prev && entry.position > 0 {
                Some(prefix_vertex_before(
                    snapshot,
                    walk,
                    entry.position,
                    roster,
                    log,
                    cfg.walk_len,
                )?)
            } else {
                None
            };
            sample_walk_from(snapshot, cfg, walk, epoch, entry.position, entry.vertex, prev)
        })
        .collect::<Result<_, _>>()?;

    let mut stats = RewalkStats {
        pmin_histogram: vec![0; cfg.walk_len as usize],
        ..Default::default()
    };
    for ((walk, entry), walk_out) in entries.iter().zip(&sampled) {
        log.record(*walk, epoch, entry.position);
        stats.affected_walks += 1;
        stats.insertions += cfg.walk_len - entry.position;
        stats.pmin_histogram[entry.position as usize] += 1;
        if walk_out.padded {
            stats.padded_walks += 1;
        }
        debug_assert_eq!(walk_out.triplets.len() as u64, cfg.walk_len - entry.position);
    }
    Ok((sampled, stats))
}

/// Vertex at `position - 1` of a live walk, via prefix reconstruction.
fn prefix_vertex_before(
    snapshot: &GraphSnapshot,
    walk: u64,
    position: u64,
    roster: &WalkRoster,
    log: &RewriteLog,
    walk_len: u64,
) -> Result<u64, CorpusError> {
    let mut cur = roster.start_of(walk).ok_or(CorpusError::WalkNotLive(walk))?;
    for p in 0..position - 1 {
        cur = find_next(snapshot, cur, walk, p, walk_len, log)?
            .ok_or(CorpusError::BrokenChain { walk, position: p })?;
    }
    Ok(cur)
}

/// Consolidates every vertex's walk-tree versions into a single version
/// holding exactly its valid triplets, with tight next-vertex bounds.
/// Vertices are processed in parallel. The caller clears the rewrite log
/// once the merged snapshot is published.
pub fn merge(snapshot: &GraphSnapshot, walk_len: u64, log: &RewriteLog) -> GraphSnapshot {
    let params = snapshot.params();
    let epoch = snapshot.epoch;
    let log_empty = log.is_empty();
    let merged: Vec<(u64, VertexEntry)> = snapshot
        .vertex_entries()
        .into_par_iter()
        .map(|(v, entry)| {
            if log_empty && entry.walk_versions.len() <= 1 {
                return (v, entry);
            }
            let mut survivors = Vec::new();
            let mut bounds: Option<(u64, u64)> = None;
            for (stored_epoch, wt) in &entry.walk_versions {
                wt.iterate(&mut |value| {
                    let t = codec::decode_triplet(value, walk_len);
                    if log.is_valid(t.walk_id, *stored_epoch, t.position) {
                        survivors.push(value);
                        bounds = Some(match bounds {
                            Some((lo, hi)) => (lo.min(t.next_vertex), hi.max(t.next_vertex)),
                            None => (t.next_vertex, t.next_vertex),
                        });
                    }
                });
            }
            survivors.sort_unstable();
            survivors.dedup();
            let walk_versions = if survivors.is_empty() {
                Vec::new()
            } else {
                vec![(
                    epoch,
                    CTree::build(&survivors, params).expect("sorted survivor set"),
                )]
            };
            (
                v,
                VertexEntry {
                    edge_tree: entry.edge_tree,
                    walk_versions,
                    bounds,
                },
            )
        })
        .collect();
    snapshot.with_vertices(Tree::from_sorted(merged), epoch)
}
