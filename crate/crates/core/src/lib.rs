//! In-memory engine for maintaining random-walk corpora over streaming
//! graphs.
//!
//! The graph and its walk corpus live in one persistent tree-of-trees: every
//! vertex carries a compressed tree of its neighbors and compressed trees of
//! the encoded walk triplets it participates in. Edge batches produce new
//! snapshots without disturbing readers; affected walks are re-sampled from
//! their first stale position so the corpus stays statistically equivalent
//! to one regenerated from scratch.

pub mod baseline;
pub mod codec;
pub mod corpus;
pub mod ctree;
pub mod engine;
pub mod hybrid;
pub mod models;
pub mod pftree;
pub mod rng;
pub mod updater;
