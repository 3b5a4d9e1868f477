//! Integer codecs for walk storage: the Szudzik pairing function, the walk
//! triplet encoding built on top of it, and the delta + variable-byte codec
//! used for tree chunks.
//!
//! Every walk triplet `(walk, position, next_vertex)` collapses into a single
//! `u64` via `pair(walk * len + position, next_vertex)`. The pairing is
//! monotone in its second operand for a fixed first operand, which is what
//! lets searches build `[lb, ub]` value ranges instead of decoding whole
//! trees.

use thiserror::Error;

/// Bit width cap for each pairing operand. Two 32-bit operands always fit in
/// one 64-bit encoded value.
pub const OPERAND_BITS: u32 = 32;

/// Exclusive upper bound for a pairing operand.
pub const OPERAND_LIMIT: u64 = 1 << OPERAND_BITS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("pairing operand {0} does not fit in {OPERAND_BITS} bits")]
    OperandOverflow(u64),
    #[error(
        "walk coordinates overflow the encoding: walk {walk_id} at position {position} \
         with walk length {walk_len}"
    )]
    CoordinateOverflow {
        walk_id: u64,
        position: u64,
        walk_len: u64,
    },
    #[error("chunk input must be strictly increasing (violated at index {0})")]
    NotStrictlyIncreasing(usize),
    #[error("chunk bytes truncated: expected {expected} values, decoded {got}")]
    TruncatedChunk { expected: usize, got: usize },
}

/// One stored unit of a random walk: vertex `next_vertex` follows the owning
/// vertex of this triplet, which sits at `position` of walk `walk_id`.
///
/// For the terminal position `walk_len - 1` the next vertex equals the owner
/// itself, marking the end of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct WalkTriplet {
    pub walk_id: u64,
    pub position: u64,
    pub next_vertex: u64,
}

/// `y^2 + x` below the diagonal, `x^2 + x + y` on or above it.
///
/// Injective over pairs of 32-bit operands and strictly increasing in `y`
/// for fixed `x`. Values are laid out in shells of `max(x, y)`: every pair
/// with `max(x, y) = m` encodes into `[m^2, m^2 + 2m]`.
pub fn szudzik_pair(x: u64, y: u64) -> Result<u64, CodecError> {
    if x >= OPERAND_LIMIT {
        return Err(CodecError::OperandOverflow(x));
    }
    if y >= OPERAND_LIMIT {
        return Err(CodecError::OperandOverflow(y));
    }
    Ok(if x < y { y * y + x } else { x * x + x + y })
}

/// Inverse of [`szudzik_pair`], total on `u64`.
///
/// `u64::isqrt` is an exact integer square root, so the two-case floor-sqrt
/// formula is exact over the whole 64-bit range.
pub fn szudzik_unpair(z: u64) -> (u64, u64) {
    let s = z.isqrt();
    let rem = z - s * s;
    if rem < s {
        (rem, s)
    } else {
        (s, rem - s)
    }
}

/// Collapses `(walk, position)` into one key: `walk * walk_len + position`.
pub fn walk_key(walk_id: u64, position: u64, walk_len: u64) -> Result<u64, CodecError> {
    debug_assert!(position < walk_len);
    let f = walk_id
        .checked_mul(walk_len)
        .and_then(|v| v.checked_add(position))
        .ok_or(CodecError::CoordinateOverflow {
            walk_id,
            position,
            walk_len,
        })?;
    if f >= OPERAND_LIMIT {
        return Err(CodecError::CoordinateOverflow {
            walk_id,
            position,
            walk_len,
        });
    }
    Ok(f)
}

/// Encodes a walk triplet as a single integer value.
pub fn encode_triplet(t: &WalkTriplet, walk_len: u64) -> Result<u64, CodecError> {
    let f = walk_key(t.walk_id, t.position, walk_len)?;
    szudzik_pair(f, t.next_vertex)
}

/// Decodes a triplet previously produced by [`encode_triplet`] with the same
/// walk length.
pub fn decode_triplet(value: u64, walk_len: u64) -> WalkTriplet {
    debug_assert!(walk_len > 0);
    let (f, next_vertex) = szudzik_unpair(value);
    WalkTriplet {
        walk_id: f / walk_len,
        position: f % walk_len,
        next_vertex,
    }
}

/// A delta + varint compressed run of strictly increasing `u64` values.
///
/// The first value is stored absolute, every following one as the difference
/// to its predecessor. Each integer is emitted little-endian in 7-bit groups
/// with the high bit set on all non-final bytes. The layout is part of the
/// stable snapshot format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkBytes {
    pub bytes: Vec<u8>,
    pub count: u32,
}

impl ChunkBytes {
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

fn push_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *bytes.get(*pos)?;
        *pos += 1;
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Some(value);
        }
        shift += 7;
    }
}

/// Difference-encodes a strictly increasing sequence.
pub fn compress_chunk(values: &[u64]) -> Result<ChunkBytes, CodecError> {
    let mut bytes = Vec::with_capacity(values.len() * 2);
    let mut prev = 0u64;
    for (i, &v) in values.iter().enumerate() {
        if i == 0 {
            push_varint(&mut bytes, v);
        } else {
            if v <= prev {
                return Err(CodecError::NotStrictlyIncreasing(i));
            }
            push_varint(&mut bytes, v - prev);
        }
        prev = v;
    }
    Ok(ChunkBytes {
        bytes,
        count: values.len() as u32,
    })
}

/// Exact inverse of [`compress_chunk`].
pub fn decompress_chunk(chunk: &ChunkBytes) -> Result<Vec<u64>, CodecError> {
    let mut out = Vec::with_capacity(chunk.count as usize);
    decompress_chunk_into(chunk, &mut out)?;
    Ok(out)
}

/// Like [`decompress_chunk`] but appends into a caller-provided buffer.
pub fn decompress_chunk_into(chunk: &ChunkBytes, out: &mut Vec<u64>) -> Result<(), CodecError> {
    let mut pos = 0usize;
    let mut acc = 0u64;
    for i in 0..chunk.count as usize {
        let delta = read_varint(&chunk.bytes, &mut pos).ok_or(CodecError::TruncatedChunk {
            expected: chunk.count as usize,
            got: i,
        })?;
        acc = if i == 0 { delta } else { acc + delta };
        out.push(acc);
    }
    Ok(())
}
