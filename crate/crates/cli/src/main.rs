use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fclsh::bench::bench_hashing;
use fclsh::binarize::{binarize, read_vectors};
use fclsh::experiment::{
    build_searcher, mean_row, run_experiment, ExperimentConfig, Method, PlanChoice, SeedMode,
};
use fclsh::format::{read_dataset, read_truth, write_csv, write_dataset};
use fclsh::oracle::{distance_histogram, oracle_scan};
use fclsh::synth::{gen_synthetic, hold_out, parse_plantings, SynthSpec};
use fclsh::{CliError, Result};
use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::Dataset;
use log::info;
use rand::seq::index::sample;

#[derive(Parser)]
#[command(name = "fclsh", version, about = "Exact Hamming-space near-neighbor search benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset, queries and ground truth.
    Gen(GenArgs),
    /// Turn real-valued vectors into binary codes with random hyperplanes.
    Binarize(BinarizeArgs),
    /// Compute exact neighbors of each query by linear scan.
    Oracle(OracleArgs),
    /// Build an index and report its shape and build time.
    Build(BuildArgs),
    /// Run queries against a method and write per-query metrics.
    Query(QueryArgs),
    /// Time the two covering hash paths.
    Bench(BenchArgs),
    /// Histogram of query-to-point distances.
    Hist(HistArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Total points, planted neighbors included.
    #[arg(long)]
    n: usize,
    #[arg(long, short)]
    d: usize,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    /// Neighbors per query as RADIUS:COUNT items; a radius may be a range A-B.
    #[arg(long, default_value = "")]
    planted: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset output; `.txt` selects the text format.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    query_out: PathBuf,
    /// Ground-truth CSV listing neighbors up to `--truth-r`.
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Radius covered by the ground truth; defaults to the largest planted radius.
    #[arg(long)]
    truth_r: Option<usize>,
}

#[derive(Args)]
struct BinarizeArgs {
    /// Real-valued rows: `.fvecs`, or text with comma/space separated values.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Move this many random rows out of the dataset to serve as queries.
    #[arg(long, requires = "query_out")]
    holdout: Option<usize>,
    #[arg(long)]
    query_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct MethodArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    r: usize,
    /// Approximation ratio used to pick the dimension transform.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Bit-sampling false-negative target.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Bit-sampling table count.
    #[arg(long)]
    tables: Option<usize>,
    /// Bits sampled per bit-sampling table.
    #[arg(long)]
    samples: Option<usize>,
    /// MIH substring count.
    #[arg(long)]
    parts: Option<usize>,
    /// Covering transform: auto, identity, replicate:T or partition:T.
    #[arg(long, value_parser = parse_plan)]
    plan: Option<PlanChoice>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_plan(s: &str) -> std::result::Result<PlanChoice, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

impl MethodArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            c: self.c,
            delta: self.delta,
            tables: self.tables,
            samples: self.samples,
            parts: self.parts,
            plan: self.plan,
            seed: self.seed,
            ..ExperimentConfig::new(self.method, self.r)
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Ground-truth CSV; computed by linear scan when absent.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_enum, default_value_t = SeedMode::Fresh)]
    seed_mode: SeedMode,
    /// Per-query metrics CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7")]
    radii: Vec<u32>,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HistArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Use a random sample of this many data points.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn load_pair(data: &Path, queries: &Path) -> Result<(Dataset, Dataset)> {
    let data = read_dataset(data)?;
    let queries = read_dataset(queries)?;
    if data.dims() != queries.dims() {
        return Err(CliError::Usage(format!(
            "dataset has {} bits but queries have {}",
            data.dims(),
            queries.dims()
        )));
    }
    Ok((data, queries))
}

fn gen(args: GenArgs) -> Result<()> {
    let planted = parse_plantings(&args.planted)?;
    let spec = SynthSpec {
        n: args.n,
        dims: args.d,
        queries: args.queries,
        planted,
        seed: args.seed,
    };
    let s = gen_synthetic(&spec)?;
    write_dataset(&args.out, &s.data)?;
    write_dataset(&args.query_out, &s.queries)?;
    if let Some(path) = args.truth_out {
        let r = args
            .truth_r
            .or_else(|| spec.planted.iter().map(|p| p.radius).max())
            .unwrap_or(0);
        write_csv(&path, oracle_scan(&s.data, &s.queries, r)?.rows())?;
    }
    info!("wrote {} points and {} queries of {} bits", s.data.len(), s.queries.len(), args.d);
    Ok(())
}

fn binarize_cmd(args: BinarizeArgs) -> Result<()> {
    let rows = read_vectors(&args.input)?;
    let data = binarize(&rows, args.bits, args.seed)?;
    match (args.holdout, args.query_out) {
        (Some(k), Some(qpath)) => {
            let (kept, held) = hold_out(data, k, args.seed)?;
            write_dataset(&args.out, &kept)?;
            write_dataset(&qpath, &held)?;
        }
        _ => write_dataset(&args.out, &data)?,
    }
    Ok(())
}

fn oracle_cmd(args: OracleArgs) -> Result<()> {
    let (data, queries) = load_pair(&args.input, &args.queries)?;
    write_csv(&args.out, oracle_scan(&data, &queries, args.r)?.rows())
}

fn build_cmd(args: BuildArgs) -> Result<()> {
    let data = read_dataset(&args.input)?;
    let cfg = args.method.config();
    cfg.validate(&data, &Dataset::new(data.dims(), Vec::new())?)?;
    let started = Instant::now();
    let searcher = build_searcher(&cfg, &data, cfg.seed)?;
    println!(
        "{} over {} points of {} bits: {} (built in {:.2?})",
        cfg.method.name(),
        data.len(),
        data.dims(),
        searcher.describe(),
        started.elapsed()
    );
    Ok(())
}

fn query_cmd(args: QueryArgs) -> Result<()> {
    let (data, queries) = load_pair(&args.input, &args.queries)?;
    let cfg = ExperimentConfig {
        repeats: args.repeats,
        seed_mode: args.seed_mode,
        ..args.method.config()
    };
    cfg.validate(&data, &queries)?;
    let truth = match &args.truth {
        Some(path) => {
            let gt = read_truth(path, queries.len())?;
            if gt.max_distance().is_some_and(|m| (m as usize) < cfg.r) {
                log::warn!("ground truth may not cover radius {}", cfg.r);
            }
            gt
        }
        None => oracle_scan(&data, &queries, cfg.r)?,
    };
    let rows = run_experiment(&cfg, &data, &queries, &truth.near_sets(cfg.r))?;
    write_csv(&args.out, &rows)?;
    if let Some(m) = mean_row(&rows) {
        println!(
            "{} r={}: collisions {:.1}, candidates {:.1}, precision {:.4}, recall {:.4}, S1/S2/S3 {:.1}/{:.1}/{:.1} us",
            m.method, m.r, m.collisions, m.candidates, m.precision, m.recall, m.time_s1_us, m.time_s2_us, m.time_s3_us
        );
    }
    Ok(())
}

fn bench_cmd(args: BenchArgs) -> Result<()> {
    let rows = bench_hashing(&args.dims, &args.radii, args.queries, args.seed)?;
    for r in &rows {
        println!(
            "d={:4} r={:2} L={:5}: fast {:8.2} us, slow {:8.2} us, speedup {:6.2}{}",
            r.dims,
            r.r,
            r.tables,
            r.fast_us,
            r.slow_us,
            r.speedup,
            if r.identical { "" } else { "  HASH MISMATCH" }
        );
    }
    write_csv(&args.out, &rows)
}

fn hist_cmd(args: HistArgs) -> Result<()> {
    let (mut data, queries) = load_pair(&args.input, &args.queries)?;
    if let Some(k) = args.sample.filter(|&k| k < data.len()) {
        let mut rng = stream_rng(args.seed, Stream::Sample, 0);
        let mut ids = sample(&mut rng, data.len(), k).into_vec();
        ids.sort_unstable();
        let pts = ids.iter().map(|&i| data.point(i as u32).clone()).collect();
        data = Dataset::new(data.dims(), pts)?;
    }
    write_csv(&args.out, &distance_histogram(&data, &queries)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Binarize(a) => binarize_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Build(a) => build_cmd(a),
        Command::Query(a) => query_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Hist(a) => hist_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

