use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use streamwalk::corpus::CorpusConfig;
use streamwalk::models::WalkModel;

use streamwalk_cli::bench::{self, EngineKind, RunConfig};
use streamwalk_cli::formats;
use streamwalk_cli::pprcheck::{self, PprParams};
use streamwalk_cli::rmat::{rmat_generate, RmatParams, StreamGen};
use streamwalk_cli::verify::{self, VerifyParams};

/// Streaming random-walk engine harness: generate graphs and update
/// streams, drive the storage engines, and verify corpus statistics.
#[derive(Parser)]
#[command(name = "streamwalk", version, about)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic graph and write it as an edge-list file.
    Generate(GenerateArgs),
    /// Produce a stream of edge-update batch files for an existing graph.
    Stream(StreamArgs),
    /// Run an engine over a graph plus update stream and report stats.
    Bench(BenchArgs),
    /// Run the statistical indistinguishability suite; exits non-zero on
    /// failure.
    Verify(VerifyArgs),
    /// Estimate PageRank from restart walks and compare static vs updating
    /// maintenance against a power-iteration oracle.
    Ppr(PprArgs),
}

#[derive(Args)]
struct QuadrantArgs {
    /// log2 of the vertex id space.
    #[arg(long, default_value_t = 14)]
    scale: u32,
    /// Skew factor: bottom-right quadrant weight relative to top-left
    /// (1 = uniform).
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    /// Explicit quadrant probabilities `a,b,c,d` (overrides --skew).
    #[arg(long, value_delimiter = ',', num_args = 4)]
    quadrants: Option<Vec<f64>>,
}

impl QuadrantArgs {
    fn params(&self, edges: usize, seed: u64) -> Result<RmatParams> {
        let mut params = match &self.quadrants {
            Some(q) => RmatParams {
                a: q[0],
                b: q[1],
                c: q[2],
                d: q[3],
                scale: self.scale,
                edges,
                seed,
            },
            None => RmatParams::skewed(self.scale, edges, seed, self.skew),
        };
        params.edges = edges;
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    shape: QuadrantArgs,
    /// Number of undirected edges to sample.
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output edge-list file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StreamArgs {
    /// Base graph edge-list file.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    shape: QuadrantArgs,
    #[arg(long = "batch-size", default_value_t = 10_000)]
    batch_size: usize,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    /// Fraction of ops that delete existing edges.
    #[arg(long = "delete-fraction", default_value_t = 0.0)]
    delete_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for `batch_NNNN.txt` files.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Walk model.
    #[arg(long, default_value = "deepwalk")]
    model: String,
    /// node2vec return parameter.
    #[arg(long = "p", default_value_t = 0.5)]
    p: f64,
    /// node2vec in-out parameter.
    #[arg(long = "q", default_value_t = 2.0)]
    q: f64,
    /// Restart probability for ppr walks.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<WalkModel> {
        let model = match self.model.as_str() {
            "deepwalk" => WalkModel::DeepWalk,
            "node2vec" => WalkModel::Node2vec {
                p: self.p,
                q: self.q,
            },
            "ppr" => WalkModel::Ppr { alpha: self.alpha },
            other => bail!("unknown model {other:?}; expected deepwalk|node2vec|ppr"),
        };
        model.validate().map_err(anyhow::Error::msg)?;
        Ok(model)
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Graph edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Storage engine under test.
    #[arg(long, default_value = "wharf")]
    engine: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Walks per vertex.
    #[arg(long, default_value_t = 10)]
    nw: u32,
    /// Walk length.
    #[arg(long, default_value_t = 80)]
    len: u64,
    /// Chunking parameter of the compressed trees.
    #[arg(long = "chunk-b", default_value_t = 32)]
    chunk_b: u32,
    /// Disable delta/varint chunk compression (store raw ids).
    #[arg(long = "no-delta", default_value_t = false)]
    no_delta: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "batch-size", default_value_t = 10_000)]
    batch_size: usize,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    #[arg(long = "delete-fraction", default_value_t = 0.0)]
    delete_fraction: f64,
    /// Merge policy: on-demand, eager, or every:k.
    #[arg(long, default_value = "on-demand")]
    policy: String,
    /// Read batches from this directory instead of sampling them.
    #[arg(long = "stream-dir")]
    stream_dir: Option<PathBuf>,
    /// Per-batch stats as JSON lines.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Per-batch rows plus summary as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Final corpus dump (`walk_id: v0 v1 ...` per line).
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 50)]
    vertices: u64,
    #[arg(long = "avg-degree", default_value_t = 6)]
    avg_degree: u64,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    #[arg(long = "batch-size", default_value_t = 25)]
    batch_size: usize,
    #[arg(long, default_value_t = 10)]
    nw: u32,
    #[arg(long, default_value_t = 20)]
    len: u64,
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// deepwalk, node2vec, or both.
    #[arg(long, default_value = "both")]
    model: String,
    #[arg(long = "p", default_value_t = 0.5)]
    p: f64,
    #[arg(long = "q", default_value_t = 2.0)]
    q: f64,
}

#[derive(Args)]
struct PprArgs {
    #[arg(long, default_value_t = 100)]
    vertices: u64,
    #[arg(long = "avg-degree", default_value_t = 6)]
    avg_degree: u64,
    #[arg(long, default_value_t = 100)]
    nw: u32,
    #[arg(long, default_value_t = 10)]
    len: u64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    batches: usize,
    #[arg(long = "batch-size", default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 4)]
    seed: u64,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Stream(args) => cmd_stream(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Ppr(args) => cmd_ppr(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let params = args.shape.params(args.edges, args.seed)?;
    let edges = rmat_generate(&params)?;
    formats::write_edge_list(&args.out, &edges)?;
    println!(
        "wrote {} edges over {} vertex ids to {}",
        edges.len(),
        1u64 << params.scale,
        args.out.display()
    );
    Ok(())
}

fn cmd_stream(args: StreamArgs) -> Result<()> {
    let edges = formats::read_edge_list(&args.graph)?;
    let params = args.shape.params(0, args.seed)?;
    let mut gen = StreamGen::new(params, &edges, args.seed);
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for i in 0..args.batches {
        let batch = gen.next_batch(args.batch_size, args.delete_fraction)?;
        let path = args.out_dir.join(format!("batch_{i:04}.txt"));
        formats::write_batch_file(&path, &batch)?;
    }
    println!(
        "wrote {} batches of {} ops to {}",
        args.batches,
        args.batch_size,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let edges = formats::read_edge_list(&args.graph)?;
    let cfg = RunConfig {
        engine: args.engine.parse::<EngineKind>()?,
        corpus: CorpusConfig::new(args.nw, args.len, args.model.model()?, args.seed),
        chunk_b: args.chunk_b,
        compress: !args.no_delta,
        policy: bench::parse_policy(&args.policy)?,
        batch_size: args.batch_size,
        batches: args.batches,
        delete_fraction: args.delete_fraction,
        stream_seed: args.seed,
        stats_path: args.stats,
        csv_path: args.csv,
        dump_path: args.dump,
        stream_dir: args.stream_dir,
    };
    let summary = bench::run(&edges, &cfg)?;
    println!(
        "generation: {:.1} ms for {} walks",
        summary.generation.as_secs_f64() * 1e3,
        summary.live_walks,
    );
    if summary.batches > 0 {
        println!(
            "updates: {} batches, {} walks updated, throughput {:.0} walks/s, latency {:.4} ms/walk",
            summary.batches,
            summary.total_affected,
            summary.throughput(),
            summary.latency_ms(),
        );
    }
    println!(
        "scratch floor: {:.0} walks/s ({:.1} ms per regeneration)",
        summary.scratch_floor(),
        summary.scratch_regen.as_secs_f64() * 1e3,
    );
    println!(
        "memory after merge: walk store {} B, graph {} B, index {} B, peak walk store {} B",
        summary.walk_store_bytes,
        summary.graph_bytes,
        summary.index_bytes,
        summary.peak_walk_store_bytes,
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let params = VerifyParams {
        vertices: args.vertices,
        avg_degree: args.avg_degree,
        batches: args.batches,
        batch_size: args.batch_size,
        walks_per_vertex: args.nw,
        walk_len: args.len,
        seeds: args.seeds,
        graph_seed: args.seed,
        ..Default::default()
    };
    let models: Vec<WalkModel> = match args.model.as_str() {
        "deepwalk" => vec![WalkModel::DeepWalk],
        "node2vec" => vec![WalkModel::Node2vec {
            p: args.p,
            q: args.q,
        }],
        "both" => vec![
            WalkModel::DeepWalk,
            WalkModel::Node2vec {
                p: args.p,
                q: args.q,
            },
        ],
        other => bail!("unknown model {other:?}; expected deepwalk|node2vec|both"),
    };
    let report = verify::run(&params, &models)?;
    for m in &report.models {
        println!(
            "{}: cells {}, max TVD updated {:.4}, scratch {:.4}, chi-square pass {}/{} ({:.1}%) -> {}",
            m.model,
            m.cells_judged,
            m.max_tvd_updated,
            m.max_tvd_scratch,
            m.chi_passed,
            m.chi_cells,
            100.0 * m.chi_pass_fraction(),
            if m.pass { "PASS" } else { "FAIL" },
        );
    }
    if !report.pass() {
        bail!("indistinguishability suite failed");
    }
    Ok(())
}

fn cmd_ppr(args: PprArgs) -> Result<()> {
    let params = PprParams {
        vertices: args.vertices,
        avg_degree: args.avg_degree,
        walks_per_vertex: args.nw,
        walk_len: args.len,
        alpha: args.alpha,
        batches: args.batches,
        batch_size: args.batch_size,
        seed: args.seed,
        ..Default::default()
    };
    let report = pprcheck::run(&params)?;
    println!(
        "top-{} max abs error vs power iteration: {:.4} (tolerance {})",
        params.top_k, report.top_k_max_abs_err, params.abs_tolerance,
    );
    println!(
        "SMAPE after {} batches: updating {:.4}, static {:.4}",
        params.batches, report.smape_updating, report.smape_static,
    );
    if !report.pass(&params) {
        bail!("ppr suite failed");
    }
    println!("PASS");
    Ok(())
}
