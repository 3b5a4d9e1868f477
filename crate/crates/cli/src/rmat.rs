//! Recursive-matrix synthetic graph and update-stream generation.

use std::collections::BTreeSet;

use anyhow::{bail, ensure, Result};
use streamwalk::hybrid::{EdgeBatch, EdgeOp, VertexId};
use streamwalk::rng::StepRng;

/// Quadrant probabilities plus shape of the sampled graph.
#[derive(Debug, Clone, Copy)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// log2 of the vertex id space.
    pub scale: u32,
    pub edges: usize,
    pub seed: u64,
}

impl RmatParams {
    /// Uniform quadrants: an Erdős–Rényi-style graph.
    pub fn er(scale: u32, edges: usize, seed: u64) -> Self {
        RmatParams {
            a: 0.25,
            b: 0.25,
            c: 0.25,
            d: 0.25,
            scale,
            edges,
            seed,
        }
    }

    /// Skewed graph with the bottom-right quadrant `s` times as likely as
    /// the top-left; `s = 1` is the uniform case.
    pub fn skewed(scale: u32, edges: usize, seed: u64, s: f64) -> Self {
        let a = 0.5 / (1.0 + s);
        RmatParams {
            a,
            b: 0.25,
            c: 0.25,
            d: 0.5 - a,
            scale,
            edges,
            seed,
        }
    }

    /// The update-batch mix used for streamed insertions: a=0.5, b=c=0.1,
    /// d=0.3.
    pub fn update_mix(scale: u32, edges: usize, seed: u64) -> Self {
        RmatParams {
            a: 0.5,
            b: 0.1,
            c: 0.1,
            d: 0.3,
            scale,
            edges,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.a + self.b + self.c + self.d;
        ensure!(
            (sum - 1.0).abs() <= 1e-9,
            "quadrant probabilities sum to {sum}, expected 1"
        );
        ensure!(
            [self.a, self.b, self.c, self.d].iter().all(|p| *p >= 0.0),
            "quadrant probabilities must be non-negative"
        );
        ensure!(self.scale >= 1 && self.scale < 32, "scale out of range");
        Ok(())
    }

    fn sample_pair(&self, rng: &mut StepRng) -> (VertexId, VertexId) {
        let mut src = 0u64;
        let mut dst = 0u64;
        for _ in 0..self.scale {
            let r = rng.unit();
            let (sbit, dbit) = if r < self.a {
                (0, 0)
            } else if r < self.a + self.b {
                (0, 1)
            } else if r < self.a + self.b + self.c {
                (1, 0)
            } else {
                (1, 1)
            };
            src = src << 1 | sbit;
            dst = dst << 1 | dbit;
        }
        (src, dst)
    }
}

/// Samples `params.edges` distinct undirected edges by recursive quadrant
/// descent; self-loops and duplicates are rejected and resampled.
pub fn rmat_generate(params: &RmatParams) -> Result<Vec<(VertexId, VertexId)>> {
    params.validate()?;
    let capacity = (1u64 << params.scale) * ((1u64 << params.scale) - 1) / 2;
    ensure!(
        (params.edges as u64) <= capacity,
        "{} edges cannot fit in a {}-vertex simple graph",
        params.edges,
        1u64 << params.scale
    );
    let mut rng = StepRng::from_key(params.seed ^ 0x6d59_70c3_6f2b_91a4);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(params.edges);
    let mut attempts = 0u64;
    let budget = 400 * params.edges as u64 + 10_000;
    while out.len() < params.edges {
        attempts += 1;
        if attempts > budget {
            bail!("edge sampling stalled after {attempts} attempts; graph too dense for rejection sampling");
        }
        let (s, d) = params.sample_pair(&mut rng);
        if s == d {
            continue;
        }
        let key = (s.min(d), s.max(d));
        if seen.insert(key) {
            out.push(key);
        }
    }
    Ok(out)
}

/// Streaming update source: batches of edge ops consistent with the evolving
/// edge set, so inserts always reference absent edges and deletes present
/// ones.
pub struct StreamGen {
    params: RmatParams,
    rng: StepRng,
    present: BTreeSet<(VertexId, VertexId)>,
    edge_list: Vec<(VertexId, VertexId)>,
}

impl StreamGen {
    pub fn new(params: RmatParams, existing: &[(VertexId, VertexId)], stream_seed: u64) -> Self {
        let present: BTreeSet<(VertexId, VertexId)> = existing
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        let edge_list = present.iter().copied().collect();
        StreamGen {
            params,
            rng: StepRng::from_key(stream_seed ^ 0x1b87_fa0c_44d1_23e9),
            present,
            edge_list,
        }
    }

    /// Next batch: `size` ops, roughly `delete_fraction` of them deletions
    /// of currently present edges, the rest fresh insertions.
    pub fn next_batch(&mut self, size: usize, delete_fraction: f64) -> Result<EdgeBatch> {
        let mut ops = Vec::with_capacity(size);
        let mut touched = BTreeSet::new();
        let mut attempts = 0u64;
        let budget = 600 * size as u64 + 10_000;
        while ops.len() < size {
            attempts += 1;
            if attempts > budget {
                bail!("batch sampling stalled; edge space exhausted");
            }
            let delete = self.rng.unit() < delete_fraction && self.edge_list.len() > size;
            if delete {
                let i = self.rng.below(self.edge_list.len() as u64) as usize;
                let key = self.edge_list[i];
                if !touched.insert(key) {
                    continue;
                }
                self.edge_list.swap_remove(i);
                self.present.remove(&key);
                ops.push((EdgeOp::Delete, key.0, key.1));
            } else {
                let (s, d) = self.params.sample_pair(&mut self.rng);
                if s == d {
                    continue;
                }
                let key = (s.min(d), s.max(d));
                if self.present.contains(&key) || !touched.insert(key) {
                    continue;
                }
                self.present.insert(key);
                self.edge_list.push(key);
                ops.push((EdgeOp::Insert, key.0, key.1));
            }
        }
        Ok(EdgeBatch::new(ops).expect("stream generator produces normalized ops"))
    }
}
