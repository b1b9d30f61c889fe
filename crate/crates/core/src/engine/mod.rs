//! Mining engine: extendable-embedding lifecycle, chunked BFS-DFS hybrid
//! exploration, circulant batch scheduling and thread dispatch.
//!
//! [`run`] executes a [`PatternApp`] on one worker; every worker of a run
//! calls it with its own partition and transport endpoint.

mod chunk;
mod comm;
mod explore;
mod metrics;
mod schedule;

use std::sync::atomic::AtomicU64;
use std::sync::Arc;
use std::time::Instant;

pub use chunk::EmbeddingState;
pub use metrics::RunMetrics;
pub use schedule::{circulant_batch, circulant_shuffle};

use crate::graph::PartitionedGraph;
use crate::plan::{PatternApp, PlanError};
use crate::sharing::{DedupTable, EdgeListCache, SharingOptions};
use crate::transport::{Transport, TransportError};

use comm::CommPool;
use explore::Explorer;
use metrics::Counters;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("an embedding needs {required} bytes but chunk_bytes is {configured}; raise chunk_bytes to at least {required}")]
    ChunkTooSmall { required: usize, configured: usize },
    #[error("lifecycle violation: {0}")]
    Lifecycle(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Per-worker engine settings.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Byte budget of every chunk.
    pub chunk_bytes: usize,
    /// Embeddings handed to a compute thread at once.
    pub mini_batch: usize,
    pub compute_threads: usize,
    /// Requester threads; responders belong to the transport.
    pub comm_threads: usize,
    /// Children buffered per thread before taking the insertion lock.
    pub insertion_buffer: usize,
    /// Cache capacity as a fraction of the global graph's CSR bytes.
    pub cache_fraction: f64,
    /// Only lists longer than this are cached.
    pub cache_degree_threshold: usize,
    /// log2 of the dedup table size.
    pub dedup_bits: u32,
    pub sharing: SharingOptions,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map_or(4, |n| n.get());
        let compute = (cores * 3 / 4).max(1);
        Self {
            chunk_bytes: 4 << 20,
            mini_batch: 64,
            compute_threads: compute,
            comm_threads: (compute / 3).max(1),
            insertion_buffer: 256,
            cache_fraction: 0.10,
            cache_degree_threshold: 64,
            dedup_bits: DedupTable::DEFAULT_BITS,
            sharing: SharingOptions::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.chunk_bytes == 0 || self.mini_batch == 0 || self.compute_threads == 0 || self.comm_threads == 0 {
            return Err(EngineError::Config("chunk_bytes, mini_batch and thread counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.cache_fraction) {
            return Err(EngineError::Config(format!("cache_fraction {} outside [0, 1]", self.cache_fraction)));
        }
        if self.dedup_bits > 30 {
            return Err(EngineError::Config("dedup_bits must be at most 30".into()));
        }
        Ok(())
    }
}

/// Result of one worker's run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Global count per pattern, summed over all workers.
    pub counts: Vec<(String, u64)>,
    /// This worker's share of each count.
    pub local_counts: Vec<u64>,
    pub metrics: RunMetrics,
}

impl RunOutput {
    pub fn count(&self, pattern: &str) -> Option<u64> {
        self.counts.iter().find(|(p, _)| p == pattern).map(|(_, c)| *c)
    }
}

/// Runs every plan of `app` on this worker's partition and reduces the
/// counts across workers.
pub fn run(
    graph: Arc<PartitionedGraph>,
    transport: Arc<dyn Transport>,
    app: &PatternApp,
    cfg: &EngineConfig,
) -> Result<RunOutput, EngineError> {
    let result = run_inner(&graph, &transport, app, cfg);
    if let Err(e) = &result {
        transport.abort(&e.to_string());
    }
    result
}

fn run_inner(
    graph: &Arc<PartitionedGraph>,
    transport: &Arc<dyn Transport>,
    app: &PatternApp,
    cfg: &EngineConfig,
) -> Result<RunOutput, EngineError> {
    cfg.validate()?;
    if transport.num_partitions() != graph.num_partitions() || transport.my_partition() != graph.my_partition() {
        return Err(EngineError::Config("transport and graph disagree on the partitioning".into()));
    }
    for (pattern, plan) in app.entries() {
        if plan.labels().is_some() && graph.labels().is_none() {
            return Err(EngineError::Config(format!("pattern {} is labeled but the graph has no labels", pattern.name())));
        }
    }
    let fingerprints = transport.all_gather(&[app.fingerprint()])?;
    if fingerprints.iter().any(|f| f.first() != Some(&app.fingerprint())) {
        return Err(EngineError::Protocol("workers run different plans".into()));
    }

    let traffic_before = transport.counters();
    let cache = cfg.sharing.cache.then(|| {
        EdgeListCache::new((cfg.cache_fraction * graph.global_csr_bytes() as f64) as usize, cfg.cache_degree_threshold)
    });
    let pool = if cfg.compute_threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.compute_threads)
                .thread_name(|i| format!("compute-{i}"))
                .build()
                .map_err(|e| EngineError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let comm = CommPool::new(cfg.comm_threads).map_err(TransportError::from)?;
    let counters = Counters::default();

    let started = Instant::now();
    let mut local_counts = Vec::with_capacity(app.entries().len());
    for (_, plan) in app.entries() {
        let ex = Explorer {
            graph,
            transport,
            cfg,
            plan,
            cache: cache.as_ref(),
            pool: pool.as_ref(),
            comm: &comm,
            counters: &counters,
            matches: AtomicU64::new(0),
        };
        local_counts.push(ex.run()?);
    }
    drop(comm);
    let explore_time = started.elapsed();

    let reduce_started = Instant::now();
    let table = transport.all_gather(&local_counts)?;
    if table.iter().any(|t| t.len() != local_counts.len()) {
        return Err(EngineError::Protocol("count vectors differ in length".into()));
    }
    let counts = app
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p.name().to_string(), table.iter().map(|t| t[i]).sum()))
        .collect();
    let reduce_time = reduce_started.elapsed();

    let traffic = transport.counters().since(&traffic_before);
    let mut metrics = RunMetrics {
        partition: graph.my_partition(),
        bytes_sent: traffic.bytes_sent(),
        bytes_received: traffic.bytes_received(),
        request_bytes_sent: traffic.request_bytes_sent,
        response_bytes_received: traffic.response_bytes_received,
        request_bytes_received: traffic.request_bytes_received,
        response_bytes_sent: traffic.response_bytes_sent,
        requests_sent: traffic.requests_sent,
        fetch_count: traffic.lists_received,
        explore_time,
        reduce_time,
        ..RunMetrics::default()
    };
    if let Some(c) = &cache {
        metrics.cache_hits = c.hits();
        metrics.cache_misses = c.misses();
        metrics.cache_bytes = c.size_bytes() as u64;
        metrics.cache_capacity = c.capacity_bytes() as u64;
    }
    counters.fill(&mut metrics);
    Ok(RunOutput { counts, local_counts, metrics })
}

#[cfg(test)]
mod tests;
