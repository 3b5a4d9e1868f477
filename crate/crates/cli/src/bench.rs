//! Benchmark driver: loads a graph, streams update batches into the chosen
//! engine, and emits per-batch stats (JSON lines), CSV summaries, and the
//! from-scratch regeneration floor.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde_json::json;
use streamwalk::baseline::IiEngine;
use streamwalk::corpus::CorpusConfig;
use streamwalk::ctree::ChunkParams;
use streamwalk::engine::{EngineConfig, WalkEngine};
use streamwalk::hybrid::EdgeBatch;
use streamwalk::updater::{mav_stats, MergePolicy};

use crate::formats::read_batch_file;
use crate::rmat::{RmatParams, StreamGen};

/// Which storage engine services the run. `Tree` is the hybrid engine with
/// chunking disabled (every element promoted, no byte compression), i.e.
/// plain balanced-tree triplet storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Wharf,
    Ii,
    Tree,
}

impl std::str::FromStr for EngineKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wharf" => Ok(EngineKind::Wharf),
            "ii" => Ok(EngineKind::Ii),
            "tree" => Ok(EngineKind::Tree),
            other => bail!("unknown engine {other:?}; expected wharf|ii|tree"),
        }
    }
}

pub fn parse_policy(s: &str) -> Result<MergePolicy> {
    match s {
        "on-demand" => Ok(MergePolicy::OnDemand),
        "eager" => Ok(MergePolicy::Eager),
        other => match other.strip_prefix("every:") {
            Some(k) => Ok(MergePolicy::EveryK(
                k.parse().context("merge interval in every:k")?,
            )),
            None => bail!("unknown policy {other:?}; expected on-demand|eager|every:k"),
        },
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub corpus: CorpusConfig,
    pub chunk_b: u32,
    pub compress: bool,
    pub policy: MergePolicy,
    pub batch_size: usize,
    pub batches: usize,
    pub delete_fraction: f64,
    pub stream_seed: u64,
    pub stats_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    pub dump_path: Option<PathBuf>,
    pub stream_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn chunk_params(&self) -> ChunkParams {
        match self.engine {
            EngineKind::Tree => ChunkParams {
                b: 1,
                compress: false,
                ..ChunkParams::default()
            },
            _ => ChunkParams {
                b: self.chunk_b,
                compress: self.compress,
                ..ChunkParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchSummary {
    pub generation: Duration,
    pub batches: usize,
    pub total_affected: u64,
    pub total_update_time: Duration,
    pub scratch_regen: Duration,
    pub live_walks: u64,
    pub walk_store_bytes: u64,
    pub graph_bytes: u64,
    pub index_bytes: u64,
    pub peak_walk_store_bytes: u64,
}

impl BenchSummary {
    /// Updated walks per second across all batches.
    pub fn throughput(&self) -> f64 {
        if self.total_update_time.is_zero() {
            0.0
        } else {
            self.total_affected as f64 / self.total_update_time.as_secs_f64()
        }
    }

    /// Mean milliseconds per updated walk.
    pub fn latency_ms(&self) -> f64 {
        if self.total_affected == 0 {
            0.0
        } else {
            self.total_update_time.as_secs_f64() * 1e3 / self.total_affected as f64
        }
    }

    /// Walks per second if the corpus were regenerated from scratch instead.
    pub fn scratch_floor(&self) -> f64 {
        if self.scratch_regen.is_zero() {
            0.0
        } else {
            self.live_walks as f64 / self.scratch_regen.as_secs_f64()
        }
    }
}

fn load_batches(cfg: &RunConfig, edges: &[(u64, u64)]) -> Result<Vec<EdgeBatch>> {
    if let Some(dir) = &cfg.stream_dir {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("reading stream dir {}", dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "txt"));
        files.sort();
        return files.iter().map(|p| read_batch_file(p)).collect();
    }
    let max_id = edges.iter().flat_map(|&(a, b)| [a, b]).max().unwrap_or(1);
    let scale = 64 - max_id.leading_zeros().max(1);
    let params = RmatParams::update_mix(scale.max(2), 0, cfg.stream_seed);
    let mut gen = StreamGen::new(params, edges, cfg.stream_seed);
    (0..cfg.batches)
        .map(|_| gen.next_batch(cfg.batch_size, cfg.delete_fraction))
        .collect()
}

struct JsonlSink(Option<BufWriter<File>>);

impl JsonlSink {
    fn open(path: &Option<PathBuf>) -> Result<Self> {
        Ok(JsonlSink(match path {
            Some(p) => Some(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => None,
        }))
    }

    fn write(&mut self, value: &serde_json::Value) -> Result<()> {
        if let Some(out) = &mut self.0 {
            writeln!(out, "{value}")?;
        }
        Ok(())
    }
}

pub fn run(edges: &[(u64, u64)], cfg: &RunConfig) -> Result<BenchSummary> {
    let mut jsonl = JsonlSink::open(&cfg.stats_path)?;
    let mut csv_rows: Vec<String> = Vec::new();
    let batches = load_batches(cfg, edges)?;
    let mut summary = BenchSummary {
        batches: batches.len(),
        ..Default::default()
    };

    match cfg.engine {
        EngineKind::Wharf | EngineKind::Tree => {
            let engine_cfg = EngineConfig {
                corpus: cfg.corpus.clone(),
                params: cfg.chunk_params(),
                policy: cfg.policy,
            };
            let mut engine = WalkEngine::new(edges, engine_cfg)?;
            let t = Instant::now();
            engine.generate()?;
            summary.generation = t.elapsed();

            for batch in &batches {
                let report = engine.apply_batch(batch)?;
                let update = report.timings.update_total();
                summary.total_affected += report.affected_walks + report.spawned_walks;
                summary.total_update_time += update;
                jsonl.write(&json!({
                    "epoch": report.epoch,
                    "affected_walks": report.affected_walks,
                    "insertions": report.insertions,
                    "spawned_walks": report.spawned_walks,
                    "retired_walks": report.retired_walks,
                    "padded_walks": report.padded_walks,
                    "pmin_histogram": report.pmin_histogram,
                    "wall_ms": update.as_secs_f64() * 1e3,
                    "merge_ms": report.timings.merge.map(|d| d.as_secs_f64() * 1e3),
                    "walk_store_bytes": report.walk_store_bytes,
                    "peak_walk_store_bytes": engine.peak_walk_store_bytes(),
                }))?;
                csv_rows.push(format!(
                    "{},{},{},{:.3},{:.6},{}",
                    report.epoch,
                    report.affected_walks,
                    report.insertions,
                    update.as_secs_f64() * 1e3,
                    if report.affected_walks > 0 {
                        update.as_secs_f64() * 1e3 / report.affected_walks as f64
                    } else {
                        0.0
                    },
                    report.walk_store_bytes,
                ));
            }

            // Post-merge memory, matching the on-demand "merge when asked".
            engine.merge_now();
            summary.live_walks = engine.live_walk_count();
            summary.walk_store_bytes = engine.walk_store_bytes();
            summary.graph_bytes = engine.graph_bytes();
            summary.peak_walk_store_bytes = engine.peak_walk_store_bytes();
            let (_, _, scratch) = engine.regenerate_from_scratch(cfg.corpus.seed ^ 0x5ca7)?;
            summary.scratch_regen = scratch;

            if let Some(path) = &cfg.dump_path {
                let mut out = BufWriter::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                );
                engine.dump_corpus(&mut out)?;
            }
        }
        EngineKind::Ii => {
            let mut engine = IiEngine::new(edges, cfg.corpus.clone())?;
            let t = Instant::now();
            engine.generate()?;
            summary.generation = t.elapsed();

            for batch in &batches {
                let report = engine.apply_batch(batch)?;
                let stats = mav_stats(&report.mav, cfg.corpus.walk_len);
                summary.total_affected += report.affected_walks + report.spawned_walks;
                summary.total_update_time += report.wall;
                let (walks_bytes, index_bytes) = engine.memory_bytes();
                jsonl.write(&json!({
                    "epoch": report.epoch,
                    "affected_walks": report.affected_walks,
                    "insertions": report.insertions,
                    "spawned_walks": report.spawned_walks,
                    "retired_walks": report.retired_walks,
                    "pmin_histogram": stats.pmin_histogram,
                    "wall_ms": report.wall.as_secs_f64() * 1e3,
                    "walk_store_bytes": walks_bytes + index_bytes,
                }))?;
                csv_rows.push(format!(
                    "{},{},{},{:.3},{:.6},{}",
                    report.epoch,
                    report.affected_walks,
                    report.insertions,
                    report.wall.as_secs_f64() * 1e3,
                    if report.affected_walks > 0 {
                        report.wall.as_secs_f64() * 1e3 / report.affected_walks as f64
                    } else {
                        0.0
                    },
                    walks_bytes + index_bytes,
                ));
            }

            summary.live_walks = engine.live_walk_count();
            let (walks_bytes, index_bytes) = engine.memory_bytes();
            summary.walk_store_bytes = walks_bytes;
            summary.index_bytes = index_bytes;
            summary.peak_walk_store_bytes = walks_bytes + index_bytes;

            // Scratch floor: regenerate on the final adjacency.
            let final_edges = engine.edges();
            let mut scratch = IiEngine::new(&final_edges, cfg.corpus.clone())?;
            let t = Instant::now();
            scratch.generate()?;
            summary.scratch_regen = t.elapsed();

            if let Some(path) = &cfg.dump_path {
                let mut out = BufWriter::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                );
                for (w, verts) in engine.live_walks() {
                    write!(out, "{w}:")?;
                    for v in verts {
                        write!(out, " {v}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
    }

    if let Some(path) = &cfg.csv_path {
        let mut out = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(
            out,
            "epoch,affected_walks,insertions,update_ms,latency_ms_per_walk,walk_store_bytes"
        )?;
        for row in &csv_rows {
            writeln!(out, "{row}")?;
        }
        writeln!(out)?;
        writeln!(out, "metric,value")?;
        writeln!(out, "generation_ms,{:.3}", summary.generation.as_secs_f64() * 1e3)?;
        writeln!(out, "throughput_walks_per_sec,{:.3}", summary.throughput())?;
        writeln!(out, "latency_ms_per_walk,{:.6}", summary.latency_ms())?;
        writeln!(out, "scratch_floor_walks_per_sec,{:.3}", summary.scratch_floor())?;
        writeln!(out, "post_merge_walk_store_bytes,{}", summary.walk_store_bytes)?;
        writeln!(out, "index_bytes,{}", summary.index_bytes)?;
        writeln!(out, "graph_bytes,{}", summary.graph_bytes)?;
        writeln!(out, "peak_walk_store_bytes,{}", summary.peak_walk_store_bytes)?;
    }
    Ok(summary)
}

/// Memory breakdown after a merge, for direct engine comparisons.
pub fn memory_report(edges: &[(u64, u64)], cfg: &RunConfig) -> Result<(u64, u64)> {
    match cfg.engine {
        EngineKind::Wharf | EngineKind::Tree => {
            let engine_cfg = EngineConfig {
                corpus: cfg.corpus.clone(),
                params: cfg.chunk_params(),
                policy: cfg.policy,
            };
            let mut engine = WalkEngine::new(edges, engine_cfg)?;
            engine.generate()?;
            engine.merge_now();
            Ok((engine.walk_store_bytes(), engine.graph_bytes()))
        }
        EngineKind::Ii => {
            let mut engine = IiEngine::new(edges, cfg.corpus.clone())?;
            engine.generate()?;
            Ok(engine.memory_bytes())
        }
    }
}

/// Convenience for tests and the `bench` command with no file outputs.
pub fn quiet_config(engine: EngineKind, corpus: CorpusConfig) -> RunConfig {
    RunConfig {
        engine,
        corpus,
        chunk_b: 32,
        compress: true,
        policy: MergePolicy::OnDemand,
        batch_size: 0,
        batches: 0,
        delete_fraction: 0.0,
        stream_seed: 1,
        stats_path: None,
        csv_path: None,
        dump_path: None,
        stream_dir: None,
    }
}
