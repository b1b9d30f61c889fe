//! Command-line interface of the `gpm` binary.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gpm_core::engine::{self, EngineConfig, RunOutput};
use gpm_core::graph::{load_edge_list, load_labels, preprocess, CanonicalGraph, Label};
use gpm_core::plan::PatternApp;
use gpm_core::sharing::SharingOptions;
use gpm_core::transport::{ClusterConfig, SocketEndpoint, Transport, TransportOptions};

use crate::app::{oracle_pattern, AppSpec};
use crate::gen::{write_edges, GraphSpec, DEFAULT_SEED};
use crate::oracle::{self, Census, OracleGraph, Semantics};
use crate::report::{Phases, Report};

#[derive(Debug, Parser)]
#[command(name = "gpm", version, about = "Distributed subgraph counting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count pattern occurrences with the distributed engine.
    Run(RunArgs),
    /// Write a synthetic edge list.
    Gen(GenArgs),
    /// Count by exhaustive enumeration (small graphs only).
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Inproc,
    Socket,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge-list file, or gen:SPEC for a generated graph (e.g. gen:er:64:0.3).
    #[arg(long, value_name = "PATH")]
    pub graph: String,
    /// Vertex label file, "v label" per line.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    /// Labels of the pattern vertices, comma separated (tc and kcc only).
    #[arg(long, value_name = "L,L,..", value_delimiter = ',')]
    pub pattern_labels: Option<Vec<Label>>,
    /// Seed for generated graphs.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// tc, 3mc, 4mc or kcc:K
    #[arg(long)]
    pub app: AppSpec,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Mode::Inproc)]
    pub mode: Mode,
    /// Cluster file for socket mode, "id host port" per line.
    #[arg(long, value_name = "PATH")]
    pub cluster: Option<PathBuf>,
    /// This process's partition in socket mode.
    #[arg(long)]
    pub partition: Option<usize>,
    /// Chunk budget in bytes; accepts K, M and G suffixes.
    #[arg(long, value_parser = parse_bytes, default_value = "4M")]
    pub chunk_bytes: usize,
    #[arg(long, default_value_t = 0.10)]
    pub cache_fraction: f64,
    /// Only lists with more entries than this are cached.
    #[arg(long, default_value_t = 64)]
    pub cache_threshold: usize,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub no_dedup: bool,
    #[arg(long)]
    pub no_vreuse: bool,
    #[arg(long)]
    pub no_creuse: bool,
    /// Orient the graph into a DAG by degree (tc and kcc only).
    #[arg(long)]
    pub orient: bool,
    /// Compute threads per worker.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Requester threads per worker.
    #[arg(long)]
    pub comm_threads: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub mini_batch: usize,
    /// Transport timeout in seconds.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    /// Write the key=value report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Include per-vertex fetch counts in the report.
    #[arg(long)]
    pub report_fetches: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// complete:N, star:LEAVES, path:N, cycle:N, er:N:P or rmat:SCALE[:EF]
    pub spec: GraphSpec,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub app: AppSpec,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Count edge-induced instead of vertex-induced matches.
    #[arg(long)]
    pub edge_induced: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_bytes(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let (digits, shift) = match s.char_indices().last() {
        Some((i, 'K' | 'k')) => (&s[..i], 10),
        Some((i, 'M' | 'm')) => (&s[..i], 20),
        Some((i, 'G' | 'g')) => (&s[..i], 30),
        _ => (s, 0),
    };
    let n: usize = digits.parse().map_err(|_| format!("invalid byte size {s:?}"))?;
    n.checked_shl(shift).filter(|v| v >> shift == n).ok_or_else(|| format!("byte size {s:?} overflows"))
}

pub fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Run(a) => run(a, out),
        Command::Gen(a) => gen(a, out),
        Command::Oracle(a) => oracle_cmd(a, out),
    }
}

fn load_graph(a: &GraphArgs) -> anyhow::Result<CanonicalGraph> {
    let g = match a.graph.strip_prefix("gen:") {
        Some(spec) => spec.parse::<GraphSpec>()?.build(a.seed),
        None => {
            let f = File::open(&a.graph).with_context(|| format!("opening {}", a.graph))?;
            preprocess(&load_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", a.graph))?)
        }
    };
    match &a.labels {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let labels = load_labels(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
            Ok(g.with_labels(&labels)?)
        }
        None => Ok(g),
    }
}

fn build_app(spec: AppSpec, g: &GraphArgs) -> Result<PatternApp, CliError> {
    match &g.pattern_labels {
        Some(l) => {
            if g.labels.is_none() {
                return Err(usage("--pattern-labels needs --labels"));
            }
            spec.build_labeled(l).map_err(|e| usage(e.to_string()))
        }
        None => spec.build().map_err(|e| usage(e.to_string())),
    }
}

fn engine_config(a: &RunArgs) -> EngineConfig {
    let mut cfg = EngineConfig {
        chunk_bytes: a.chunk_bytes,
        mini_batch: a.mini_batch,
        cache_fraction: a.cache_fraction,
        cache_degree_threshold: a.cache_threshold,
        sharing: SharingOptions {
            vertical_reuse: !a.no_vreuse,
            computation_reuse: !a.no_creuse,
            horizontal_sharing: !a.no_dedup,
            cache: !a.no_cache,
        },
        ..EngineConfig::default()
    };
    if let Some(t) = a.threads {
        cfg.compute_threads = t;
        cfg.comm_threads = (t / 3).max(1);
    }
    if let Some(c) = a.comm_threads {
        cfg.comm_threads = c;
    }
    cfg
}

fn run(a: RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    if a.orient && !a.app.is_clique() {
        return Err(usage("--orient is only valid with tc or kcc:K"));
    }
    let socket = match a.mode {
        Mode::Socket => {
            let cluster = a.cluster.as_ref().ok_or_else(|| usage("socket mode needs --cluster"))?;
            let me = a.partition.ok_or_else(|| usage("socket mode needs --partition"))?;
            Some((cluster.clone(), me))
        }
        Mode::Inproc if a.cluster.is_some() || a.partition.is_some() => {
            return Err(usage("--cluster and --partition need --mode socket"));
        }
        Mode::Inproc => None,
    };
    let mut app = build_app(a.app, &a.graph)?;
    let cfg = engine_config(&a);
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let started = Instant::now();
    let mut g = load_graph(&a.graph)?;
    if a.orient {
        g = g.orient();
        app = app.for_oriented_graph().map_err(|e| usage(e.to_string()))?;
    }
    let load = started.elapsed();

    let (outs, partition) = match socket {
        None => {
            let started = Instant::now();
            let parts = g.partition(a.workers).map_err(anyhow::Error::from)?;
            let partition = started.elapsed();
            (gpm_core::run_partitions(parts, &app, &cfg).map_err(anyhow::Error::from)?, partition)
        }
        Some((path, me)) => {
            let cluster = ClusterConfig::load(&path).with_context(|| format!("reading {}", path.display()))?;
            let n = cluster.num_partitions();
            if me >= n {
                return Err(usage(format!("--partition {me} but the cluster has {n} workers")));
            }
            if a.workers != 1 && a.workers != n {
                return Err(usage(format!("--workers {} disagrees with the {n}-worker cluster file", a.workers)));
            }
            let started = Instant::now();
            let part = Arc::new(g.partition(n).map_err(anyhow::Error::from)?.swap_remove(me));
            let partition = started.elapsed();
            drop(g);
            let opts = TransportOptions { timeout: Duration::from_secs(a.timeout), ..TransportOptions::default() };
            let ep: Arc<dyn Transport> = Arc::new(SocketEndpoint::start(&cluster, me, part.clone(), opts).map_err(anyhow::Error::from)?);
            (vec![engine::run(part, ep, &app, &cfg).map_err(anyhow::Error::from)?], partition)
        }
    };

    print_counts(&outs[0].counts, out)?;
    for o in &outs {
        print_worker(o, out)?;
    }
    if let Some(path) = &a.report {
        let report = Report::from_outputs(&outs, Phases { load, partition }, a.report_fetches);
        write_file(path, report.to_string().as_bytes())?;
    }
    Ok(())
}

fn print_counts(counts: &[(String, u64)], out: &mut dyn Write) -> anyhow::Result<()> {
    let line: Vec<String> = counts.iter().map(|(p, c)| format!("{p}: {c}")).collect();
    writeln!(out, "{}", line.join(", "))?;
    Ok(())
}

fn print_worker(o: &RunOutput, out: &mut dyn Write) -> anyhow::Result<()> {
    let m = &o.metrics;
    writeln!(
        out,
        "worker {}: sent {} B, received {} B, {} lists fetched in {} requests, cache {}/{} hits, dedup shared {} dropped {}, peak {} chunks / {} B, {} embeddings, explore {:.3}s",
        m.partition,
        m.bytes_sent,
        m.bytes_received,
        m.fetch_count,
        m.requests_sent,
        m.cache_hits,
        m.cache_hits + m.cache_misses,
        m.dedup_shared,
        m.dedup_dropped,
        m.peak_live_chunks,
        m.peak_arena_bytes,
        m.embeddings_created,
        m.explore_time.as_secs_f64(),
    )?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let edges = a.spec.edges(a.seed);
    match &a.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_edges(&edges, BufWriter::new(f)).context("writing edges")?;
        }
        None => write_edges(&edges, out).context("writing edges")?,
    }
    Ok(())
}

fn oracle_cmd(a: OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let app = build_app(a.app, &a.graph)?;
    let g = load_graph(&a.graph)?;
    let mut og = OracleGraph::new(g.num_vertices(), g.edges());
    if let Some(l) = g.labels() {
        og = og.with_labels(l.to_vec());
    }
    let sem = if a.edge_induced { Semantics::EdgeInduced } else { Semantics::VertexInduced };
    let k = app.entries()[0].0.size();
    let census = if a.graph.pattern_labels.is_none() {
        Some(Census::new(&og, k).map_err(|e| anyhow!(e))?)
    } else {
        oracle::check_size(og.num_vertices(), k).map_err(|e| anyhow!(e))?;
        None
    };
    let mut counts = Vec::new();
    for (p, _) in app.entries() {
        let op = oracle_pattern(p).map_err(|e| anyhow!(e))?;
        let c = match &census {
            Some(c) => c.count(&op, sem),
            None => oracle::oracle_count(&og, &op, sem).map_err(|e| anyhow!(e))?,
        };
        counts.push((p.name().to_string(), c));
    }
    print_counts(&counts, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_sizes() {
        assert_eq!(parse_bytes("64K"), Ok(64 << 10));
        assert_eq!(parse_bytes("1M"), Ok(1 << 20));
        assert_eq!(parse_bytes("16m"), Ok(16 << 20));
        assert_eq!(parse_bytes("4096"), Ok(4096));
        assert!(parse_bytes("x").is_err());
        assert!(parse_bytes("").is_err());
        assert!(parse_bytes(&format!("{}G", usize::MAX)).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
