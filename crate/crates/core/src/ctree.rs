//! Compressed purely-functional ordered set of 64-bit integers.
//!
//! A hash of each element decides whether it is promoted to a *head*; heads
//! live in a persistent weight-balanced tree and each carries its *tail*: the
//! run of elements up to the next head, stored delta + varint compressed.
//! Elements smaller than every head form the headless *prefix* chunk. Chunk
//! membership is a property of the element alone, so batch updates stay local
//! to the chunks they touch and all older tree versions remain readable.

use std::io::{self, Read, Write};
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::codec::{self, ChunkBytes, CodecError};
use crate::pftree::{NodeRef, Summary, Tree};
use crate::rng::mix64;

/// Chunking configuration. `b` is the expected chunk size; `b = 1` promotes
/// every element, which degenerates into a plain uncompressed tree (the
/// "tree" engine mode). `compress = false` keeps the chunk layout but stores
/// raw fixed-width values instead of delta + varint bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkParams {
    pub b: u32,
    pub hash_seed: u64,
    pub compress: bool,
}

impl Default for ChunkParams {
    fn default() -> Self {
        ChunkParams {
            b: 32,
            hash_seed: 0x9044_2ec2_48f4_17f1,
            compress: true,
        }
    }
}

impl ChunkParams {
    pub fn with_seed(seed: u64) -> Self {
        ChunkParams {
            hash_seed: seed,
            ..Default::default()
        }
    }

    #[inline]
    pub fn is_head(&self, element: u64) -> bool {
        debug_assert!(self.b >= 1);
        mix64(element ^ self.hash_seed) % self.b as u64 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("input must be sorted and duplicate-free (violated at index {0})")]
    UnsortedInput(usize),
    #[error("malformed tree snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// One compressed run of elements with its extrema cached so range scans can
/// skip the chunk without decoding it.
#[derive(Debug, Clone)]
struct Chunk {
    count: u32,
    first: u64,
    last: u64,
    bytes: Arc<[u8]>,
}

impl Chunk {
    fn empty() -> Self {
        Chunk {
            count: 0,
            first: 0,
            last: 0,
            bytes: Arc::from(Vec::new()),
        }
    }

    fn from_values(values: &[u64], params: &ChunkParams) -> Result<Self, TreeError> {
        if values.is_empty() {
            return Ok(Chunk::empty());
        }
        let bytes = if params.compress {
            codec::compress_chunk(values)?.bytes
        } else {
            let mut raw = Vec::with_capacity(values.len() * 8);
            for v in values {
                raw.extend_from_slice(&v.to_le_bytes());
            }
            raw
        };
        Ok(Chunk {
            count: values.len() as u32,
            first: values[0],
            last: *values.last().unwrap(),
            bytes: Arc::from(bytes),
        })
    }

    fn decode_into(&self, params: &ChunkParams, out: &mut Vec<u64>) {
        if self.count == 0 {
            return;
        }
        if params.compress {
            let wire = ChunkBytes {
                bytes: self.bytes.to_vec(),
                count: self.count,
            };
            codec::decompress_chunk_into(&wire, out)
                .expect("stored chunk bytes are always well formed");
        } else {
            for i in 0..self.count as usize {
                let mut buf = [0u8; 8];
                buf.copy_from_slice(&self.bytes[i * 8..i * 8 + 8]);
                out.push(u64::from_le_bytes(buf));
            }
        }
    }

    fn values(&self, params: &ChunkParams) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count as usize);
        self.decode_into(params, &mut out);
        out
    }

    fn overlaps(&self, lb: u64, ub: u64) -> bool {
        self.count > 0 && ub >= self.first && lb <= self.last
    }
}

/// Subtree element total (head + tail counts), for rank/select descent.
#[derive(Debug, Clone, Copy, Default)]
struct ElemCount(u64);

impl Summary<u64, Chunk> for ElemCount {
    fn compute(_: &u64, chunk: &Chunk, left: Option<&Self>, right: Option<&Self>) -> Self {
        ElemCount(
            1 + chunk.count as u64 + left.map_or(0, |s| s.0) + right.map_or(0, |s| s.0),
        )
    }
}

type HeadTree = Tree<u64, Chunk, ElemCount>;
type HeadNode<'a> = NodeRef<'a, u64, Chunk, ElemCount>;

/// Counters reported by range scans: `visited` elements were delivered to
/// the callback, `decoded` elements were decompressed to find them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RangeStats {
    pub visited: u64,
    pub decoded: u64,
}

#[derive(Clone)]
pub struct CTree {
    params: ChunkParams,
    prefix: Chunk,
    tree: HeadTree,
}

impl CTree {
    pub fn new(params: ChunkParams) -> Self {
        CTree {
            params,
            prefix: Chunk::empty(),
            tree: Tree::new(),
        }
    }

    /// Builds a tree from a sorted, duplicate-free slice.
    pub fn build(values: &[u64], params: ChunkParams) -> Result<Self, TreeError> {
        validate_sorted(values)?;
        Ok(Self::build_unchecked(values, params))
    }

    fn build_unchecked(values: &[u64], params: ChunkParams) -> Self {
        let mut prefix_vals: &[u64] = values;
        let mut nodes: Vec<(u64, Chunk)> = Vec::new();
        let mut head_at: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            if params.is_head(v) {
                match head_at {
                    None => prefix_vals = &values[..i],
                    Some(h) => nodes.push((
                        values[h],
                        Chunk::from_values(&values[h + 1..i], &params)
                            .expect("sorted run compresses"),
                    )),
                }
                head_at = Some(i);
            }
        }
        if let Some(h) = head_at {
            nodes.push((
                values[h],
                Chunk::from_values(&values[h + 1..], &params).expect("sorted run compresses"),
            ));
        }
        CTree {
            params,
            prefix: Chunk::from_values(prefix_vals, &params).expect("sorted run compresses"),
            tree: Tree::from_sorted(nodes),
        }
    }

    pub fn params(&self) -> &ChunkParams {
        &self.params
    }

    pub fn len(&self) -> u64 {
        self.prefix.count as u64 + self.tree.summary().map_or(0, |s| s.0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn head_count(&self) -> usize {
        self.tree.len()
    }

    pub fn height(&self) -> usize {
        self.tree.height()
    }

    /// Set union with a sorted, duplicate-free batch. The receiver is left
    /// untouched; inserting a present element is a no-op.
    pub fn multi_insert(&self, xs: &[u64]) -> Result<Self, TreeError> {
        validate_sorted(xs)?;
        if xs.is_empty() {
            return Ok(self.clone());
        }
        let mut tree = self.tree.clone();
        let mut prefix = self.prefix.clone();

        // New heads first: each splits the chunk that covers its position.
        let new_heads: Vec<u64> = xs
            .iter()
            .copied()
            .filter(|&x| self.params.is_head(x) && !tree.contains_key(&x))
            .collect();
        for (region, heads) in group_by_region(&tree, &new_heads) {
            let old_values = match region {
                Some(h) => tree.get(&h).expect("region head exists").values(&self.params),
                None => prefix.values(&self.params),
            };
            // Carve the covered run at every new head.
            let mut rest: &[u64] = &old_values;
            let keep_idx = rest.partition_point(|&v| v < heads[0]);
            let keep = &rest[..keep_idx];
            rest = &rest[keep_idx..];
            match region {
                Some(h) => tree = tree.insert(h, Chunk::from_values(keep, &self.params)?),
                None => prefix = Chunk::from_values(keep, &self.params)?,
            }
            for (i, &h) in heads.iter().enumerate() {
                let end = heads.get(i + 1).copied();
                let tail_len = match end {
                    Some(nh) => rest.partition_point(|&v| v < nh),
                    None => rest.len(),
                };
                let tail = &rest[..tail_len];
                rest = &rest[tail_len..];
                tree = tree.insert(h, Chunk::from_values(tail, &self.params)?);
            }
        }

        // Remaining values merge into the chunk covering them.
        let non_heads: Vec<u64> = xs
            .iter()
            .copied()
            .filter(|&x| !self.params.is_head(x))
            .collect();
        for (region, vals) in group_by_region(&tree, &non_heads) {
            let old_values = match region {
                Some(h) => tree.get(&h).expect("region head exists").values(&self.params),
                None => prefix.values(&self.params),
            };
            let merged = merge_sorted_dedup(&old_values, &vals);
            match region {
                Some(h) => tree = tree.insert(h, Chunk::from_values(&merged, &self.params)?),
                None => prefix = Chunk::from_values(&merged, &self.params)?,
            }
        }

        Ok(CTree {
            params: self.params,
            prefix,
            tree,
        })
    }

    /// Set difference with a sorted, duplicate-free batch; absent elements
    /// are ignored.
    pub fn multi_delete(&self, xs: &[u64]) -> Result<Self, TreeError> {
        validate_sorted(xs)?;
        if xs.is_empty() {
            return Ok(self.clone());
        }
        let mut tree = self.tree.clone();
        let mut prefix = self.prefix.clone();

        let non_heads: Vec<u64> = xs
            .iter()
            .copied()
            .filter(|&x| !self.params.is_head(x))
            .collect();
        for (region, vals) in group_by_region(&tree, &non_heads) {
            let old_values = match region {
                Some(h) => tree.get(&h).expect("region head exists").values(&self.params),
                None => prefix.values(&self.params),
            };
            let kept = subtract_sorted(&old_values, &vals);
            if kept.len() == old_values.len() {
                continue;
            }
            match region {
                Some(h) => tree = tree.insert(h, Chunk::from_values(&kept, &self.params)?),
                None => prefix = Chunk::from_values(&kept, &self.params)?,
            }
        }

        // Dropping a head orphans its tail; the survivors re-home into the
        // chunk that now covers them (they are non-heads by construction).
        let dead_heads: Vec<u64> = xs
            .iter()
            .copied()
            .filter(|&x| self.params.is_head(x) && tree.contains_key(&x))
            .collect();
        if !dead_heads.is_empty() {
            let mut orphans = Vec::new();
            for &h in &dead_heads {
                tree.get(&h)
                    .expect("dead head exists")
                    .decode_into(&self.params, &mut orphans);
            }
            for &h in &dead_heads {
                tree = tree.remove(&h);
            }
            for (region, vals) in group_by_region(&tree, &orphans) {
                let old_values = match region {
                    Some(h) => tree.get(&h).expect("region head exists").values(&self.params),
                    None => prefix.values(&self.params),
                };
                let merged = merge_sorted_dedup(&old_values, &vals);
                match region {
                    Some(h) => tree = tree.insert(h, Chunk::from_values(&merged, &self.params)?),
                    None => prefix = Chunk::from_values(&merged, &self.params)?,
                }
            }
        }

        Ok(CTree {
            params: self.params,
            prefix,
            tree,
        })
    }

    pub fn contains(&self, x: u64) -> bool {
        if self.params.is_head(x) {
            return self.tree.contains_key(&x);
        }
        let chunk = match self.tree.below(&x) {
            Some((_, chunk)) => chunk,
            None => &self.prefix,
        };
        if chunk.count == 0 || x < chunk.first || x > chunk.last {
            return false;
        }
        chunk.values(&self.params).binary_search(&x).is_ok()
    }

    /// k-th smallest element (0-based).
    pub fn select(&self, mut k: u64) -> Option<u64> {
        if k < self.prefix.count as u64 {
            return Some(self.prefix.values(&self.params)[k as usize]);
        }
        k -= self.prefix.count as u64;
        let mut node = self.tree.root()?;
        loop {
            let left_count = node.left().map_or(0, |l| l.summary().0);
            if k < left_count {
                node = node.left().expect("rank descent into missing child");
                continue;
            }
            k -= left_count;
            if k == 0 {
                return Some(*node.key());
            }
            k -= 1;
            let tail = node.val();
            if k < tail.count as u64 {
                return Some(tail.values(&self.params)[k as usize]);
            }
            k -= tail.count as u64;
            node = node.right()?;
        }
    }

    pub fn iterate(&self, f: &mut impl FnMut(u64)) {
        fn walk(
            node: HeadNode<'_>,
            params: &ChunkParams,
            f: &mut impl FnMut(u64),
            buf: &mut Vec<u64>,
        ) {
            if let Some(left) = node.left() {
                walk(left, params, f, buf);
            }
            f(*node.key());
            let tail = node.val();
            if tail.count > 0 {
                buf.clear();
                tail.decode_into(params, buf);
                for &v in buf.iter() {
                    f(v);
                }
            }
            if let Some(right) = node.right() {
                walk(right, params, f, buf);
            }
        }
        let mut buf = Vec::new();
        if self.prefix.count > 0 {
            self.prefix.decode_into(&self.params, &mut buf);
            for &v in buf.iter() {
                f(v);
            }
        }
        if let Some(root) = self.tree.root() {
            walk(root, &self.params, f, &mut buf);
        }
    }

    pub fn to_vec(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len() as usize);
        self.iterate(&mut |v| out.push(v));
        out
    }

    /// In-order visit of every element in `[lb, ub]`. Chunks whose cached
    /// extrema fall outside the range are skipped without decoding; the
    /// returned stats expose how many elements had to be decoded.
    pub fn range_iterate(
        &self,
        lb: u64,
        ub: u64,
        f: &mut impl FnMut(u64) -> ControlFlow<()>,
    ) -> RangeStats {
        let mut stats = RangeStats::default();
        if lb > ub {
            return stats;
        }
        let mut buf = Vec::new();
        if self.prefix.overlaps(lb, ub) {
            buf.clear();
            self.prefix.decode_into(&self.params, &mut buf);
            stats.decoded += self.prefix.count as u64;
            if emit_range(&buf, lb, ub, f, &mut stats).is_break() {
                return stats;
            }
        }
        if let Some(root) = self.tree.root() {
            let _ = self.walk_range(root, lb, ub, f, &mut stats, &mut buf);
        }
        stats
    }

    fn walk_range(
        &self,
        node: HeadNode<'_>,
        lb: u64,
        ub: u64,
        f: &mut impl FnMut(u64) -> ControlFlow<()>,
        stats: &mut RangeStats,
        buf: &mut Vec<u64>,
    ) -> ControlFlow<()> {
        let head = *node.key();
        if lb < head {
            if let Some(left) = node.left() {
                self.walk_range(left, lb, ub, f, stats, buf)?;
            }
        }
        if head > ub {
            return ControlFlow::Break(());
        }
        if head >= lb {
            stats.visited += 1;
            f(head)?;
        }
        let tail = node.val();
        if tail.overlaps(lb, ub) {
            buf.clear();
            tail.decode_into(&self.params, buf);
            stats.decoded += tail.count as u64;
            emit_range(buf, lb, ub, f, stats)?;
        }
        if ub > head {
            if let Some(right) = node.right() {
                self.walk_range(right, lb, ub, f, stats, buf)?;
            }
        }
        ControlFlow::Continue(())
    }

    pub fn first(&self) -> Option<u64> {
        self.select(0)
    }

    pub fn last(&self) -> Option<u64> {
        let n = self.len();
        if n == 0 {
            None
        } else {
            self.select(n - 1)
        }
    }

    pub fn max_chunk_len(&self) -> u32 {
        let mut max = self.prefix.count;
        self.tree.for_each(&mut |_, chunk| max = max.max(chunk.count));
        max
    }

    /// Payload bytes of the stored structure: chunk bytes, head values, the
    /// per-chunk extrema caches, child links, and the size field. Allocator
    /// and reference-count overhead are deliberately excluded so the number
    /// is comparable across storage engines.
    pub fn payload_bytes(&self) -> u64 {
        let mut total = 8u64 + self.prefix.bytes.len() as u64;
        if self.prefix.count > 0 {
            total += 16;
        }
        self.tree.for_each(&mut |_, chunk| {
            total += 8 + 16 + chunk.bytes.len() as u64;
            if chunk.count > 0 {
                total += 16;
            }
        });
        total
    }

    /// Stable snapshot encoding: header (size, b, hash seed), the pre-order
    /// node stream, then the prefix chunk. Byte-exact for identical inputs
    /// and parameters.
    pub fn write_snapshot(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(b"CTS1")?;
        w.write_all(&[self.params.compress as u8])?;
        w.write_all(&self.len().to_le_bytes())?;
        w.write_all(&self.params.b.to_le_bytes())?;
        w.write_all(&self.params.hash_seed.to_le_bytes())?;
        w.write_all(&(self.tree.len() as u64).to_le_bytes())?;
        let mut err = None;
        self.tree.for_each_preorder(&mut |head, chunk, has_left, has_right| {
            if err.is_some() {
                return;
            }
            let flags = (has_left as u8) | ((has_right as u8) << 1);
            let res = (|| -> io::Result<()> {
                let w2 = &mut *w;
                w2.write_all(&head.to_le_bytes())?;
                w2.write_all(&[flags])?;
                write_chunk(w2, chunk)
            })();
            if let Err(e) = res {
                err = Some(e);
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        write_chunk(w, &self.prefix)
    }

    pub fn read_snapshot(r: &mut impl Read) -> Result<Self, TreeError> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic)?;
        if &magic != b"CTS1" {
            return Err(TreeError::Snapshot("bad magic".into()));
        }
        let compress = read_u8(r)? != 0;
        let size = read_u64(r)?;
        let b = read_u32(r)?;
        if b == 0 {
            return Err(TreeError::Snapshot("chunking parameter must be >= 1".into()));
        }
        let hash_seed = read_u64(r)?;
        let params = ChunkParams { b, hash_seed, compress };
        let node_count = read_u64(r)? as usize;
        let tree: HeadTree = Tree::from_preorder(node_count, &mut || {
            let head = read_u64(r)?;
            let flags = read_u8(r)?;
            let chunk = read_chunk(r, &params)?;
            Ok::<_, TreeError>((head, chunk, flags & 1 != 0, flags & 2 != 0))
        })?;
        let prefix = read_chunk(r, &params)?;
        let out = CTree { params, prefix, tree };
        if out.len() != size {
            return Err(TreeError::Snapshot(format!(
                "size mismatch: header {size}, contents {}",
                out.len()
            )));
        }
        Ok(out)
    }

    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_snapshot(&mut out).expect("writing to Vec cannot fail");
        out
    }

    /// Full structural audit; test support.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.tree.check_invariants()?;
        let mut prev: Option<u64> = None;
        let check_chunk = |chunk: &Chunk, bound: Option<u64>, prev: &mut Option<u64>| {
            let values = chunk.values(&self.params);
            if values.len() != chunk.count as usize {
                return Err("chunk count mismatch".to_string());
            }
            if let (Some(f), Some(l)) = (values.first(), values.last()) {
                if *f != chunk.first || *l != chunk.last {
                    return Err("chunk extrema cache stale".to_string());
                }
            }
            for &v in &values {
                if self.params.is_head(v) {
                    return Err(format!("head-hashed element {v} stored inside a chunk"));
                }
                if let Some(p) = *prev {
                    if v <= p {
                        return Err(format!("order violation: {v} after {p}"));
                    }
                }
                if let Some(b) = bound {
                    if v <= b {
                        return Err(format!("chunk element {v} not above its head {b}"));
                    }
                }
                *prev = Some(v);
            }
            Ok(())
        };
        check_chunk(&self.prefix, None, &mut prev)?;
        let mut result = Ok(());
        self.tree.for_each(&mut |head, chunk| {
            if result.is_err() {
                return;
            }
            if !self.params.is_head(*head) {
                result = Err(format!("stored head {head} fails the head hash"));
                return;
            }
            if let Some(p) = prev {
                if *head <= p {
                    result = Err(format!("order violation at head {head}"));
                    return;
                }
            }
            prev = Some(*head);
            result = check_chunk(chunk, Some(*head), &mut prev);
        });
        result
    }
}

fn emit_range(
    values: &[u64],
    lb: u64,
    ub: u64,
    f: &mut impl FnMut(u64) -> ControlFlow<()>,
    stats: &mut RangeStats,
) -> ControlFlow<()> {
    let start = values.partition_point(|&v| v < lb);
    for &v in &values[start..] {
        if v > ub {
            return ControlFlow::Break(());
        }
        stats.visited += 1;
        f(v)?;
    }
    ControlFlow::Continue(())
}

fn validate_sorted(values: &[u64]) -> Result<(), TreeError> {
    for i in 1..values.len() {
        if values[i] <= values[i - 1] {
            return Err(TreeError::UnsortedInput(i));
        }
    }
    Ok(())
}

/// Splits a sorted value list into runs covered by the same chunk: the run's
/// region is the greatest head below it, or the prefix when there is none.
fn group_by_region(tree: &HeadTree, values: &[u64]) -> Vec<(Option<u64>, Vec<u64>)> {
    let mut groups: Vec<(Option<u64>, Vec<u64>)> = Vec::new();
    for &v in values {
        let region = tree.below(&v).map(|(k, _)| *k);
        match groups.last_mut() {
            Some((r, run)) if *r == region => run.push(v),
            _ => groups.push((region, vec![v])),
        }
    }
    groups
}

fn merge_sorted_dedup(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if x > y => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

fn subtract_sorted(a: &[u64], remove: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < remove.len() && remove[j] < x {
            j += 1;
        }
        if j < remove.len() && remove[j] == x {
            continue;
        }
        out.push(x);
    }
    out
}

fn write_chunk(w: &mut impl Write, chunk: &Chunk) -> io::Result<()> {
    w.write_all(&chunk.count.to_le_bytes())?;
    w.write_all(&(chunk.bytes.len() as u32).to_le_bytes())?;
    w.write_all(&chunk.bytes)
}

fn read_chunk(r: &mut impl Read, params: &ChunkParams) -> Result<Chunk, TreeError> {
    let count = read_u32(r)?;
    let len = read_u32(r)? as usize;
    let mut bytes = vec![0u8; len];
    read_exact(r, &mut bytes)?;
    let chunk = Chunk {
        count,
        first: 0,
        last: 0,
        bytes: Arc::from(bytes),
    };
    if count == 0 {
        return Ok(chunk);
    }
    // Restore the extrema cache, validating the byte stream along the way.
    let mut values = Vec::with_capacity(count as usize);
    if params.compress {
        let wire = ChunkBytes {
            bytes: chunk.bytes.to_vec(),
            count,
        };
        codec::decompress_chunk_into(&wire, &mut values)?;
    } else {
        if len != count as usize * 8 {
            return Err(TreeError::Snapshot("raw chunk length mismatch".into()));
        }
        chunk.decode_into(params, &mut values);
    }
    Ok(Chunk {
        first: values[0],
        last: *values.last().unwrap(),
        ..chunk
    })
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<(), TreeError> {
    r.read_exact(buf)
        .map_err(|e| TreeError::Snapshot(format!("unexpected end of snapshot: {e}")))
}

fn read_u8(r: &mut impl Read) -> Result<u8, TreeError> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn read_u32(r: &mut impl Read) -> Result<u32, TreeError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, TreeError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
