use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use crate::graph::VertexId;

/// Per-worker measurements of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub partition: usize,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub request_bytes_sent: u64,
    pub response_bytes_received: u64,
    pub request_bytes_received: u64,
    pub response_bytes_sent: u64,
    /// Request messages sent.
    pub requests_sent: u64,
    /// Remote edge lists received.
    pub fetch_count: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_bytes: u64,
    pub cache_capacity: u64,
    pub dedup_shared: u64,
    pub dedup_dropped: u64,
    /// Neighbor-list wire bytes not fetched thanks to in-chunk sharing.
    pub dedup_bytes_saved: u64,
    /// Neighbor-list wire bytes not fetched thanks to cache hits.
    pub cache_bytes_saved: u64,
    pub peak_live_chunks: u64,
    pub peak_arena_bytes: u64,
    pub embeddings_created: u64,
    pub ready_transitions: u64,
    pub zombie_transitions: u64,
    pub terminated_transitions: u64,
    pub intersections: u64,
    pub differences: u64,
    /// Chunks sealed, per embedding level.
    pub chunks_sealed: Vec<u64>,
    pub explore_time: Duration,
    pub reduce_time: Duration,
    /// Number of times each vertex's list was fetched from a peer.
    pub fetches_per_vertex: BTreeMap<VertexId, u64>,
    /// Cache size observed each time a chunk was sealed.
    pub cache_size_samples: Vec<u64>,
}

impl RunMetrics {
    /// Every created embedding went through each transition exactly once.
    pub fn lifecycle_consistent(&self) -> bool {
        self.embeddings_created == self.ready_transitions
            && self.ready_transitions == self.zombie_transitions
            && self.zombie_transitions == self.terminated_transitions
    }

    pub fn cache_hit_rate(&self) -> f64 {
        let total = self.cache_hits + self.cache_misses;
        if total == 0 {
            0.0
        } else {
            self.cache_hits as f64 / total as f64
        }
    }
}

/// Shared atomic counters, folded into [`RunMetrics`] at the end.
#[derive(Debug, Default)]
pub(crate) struct Counters {
    pub created: AtomicU64,
    pub ready: AtomicU64,
    pub zombie: AtomicU64,
    pub terminated: AtomicU64,
    pub shared: AtomicU64,
    pub dropped: AtomicU64,
    pub dedup_saved: AtomicU64,
    pub cache_saved: AtomicU64,
    pub intersections: AtomicU64,
    pub differences: AtomicU64,
    pub peak_chunks: AtomicUsize,
    pub peak_bytes: AtomicUsize,
    pub sealed: Mutex<Vec<u64>>,
    pub fetched: Mutex<BTreeMap<VertexId, u64>>,
    pub cache_samples: Mutex<Vec<u64>>,
}

impl Counters {
    pub fn bump(c: &AtomicU64) {
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn add(&self, c: &AtomicU64, n: u64) {
        c.fetch_add(n, Ordering::Relaxed);
    }

    pub fn observe_live(&self, chunks: usize, bytes: usize) {
        self.peak_chunks.fetch_max(chunks, Ordering::Relaxed);
        self.peak_bytes.fetch_max(bytes, Ordering::Relaxed);
    }

    pub fn sealed(&self, level: usize) {
        let mut s = self.sealed.lock().unwrap();
        if s.len() <= level {
            s.resize(level + 1, 0);
        }
        s[level] += 1;
    }

    pub fn fill(&self, m: &mut RunMetrics) {
        let l = |a: &AtomicU64| a.load(Ordering::SeqCst);
        m.embeddings_created = l(&self.created);
        m.ready_transitions = l(&self.ready);
        m.zombie_transitions = l(&self.zombie);
        m.terminated_transitions = l(&self.terminated);
        m.dedup_shared = l(&self.shared);
        m.dedup_dropped = l(&self.dropped);
        m.dedup_bytes_saved = l(&self.dedup_saved);
        m.cache_bytes_saved = l(&self.cache_saved);
        m.intersections = l(&self.intersections);
        m.differences = l(&self.differences);
        m.peak_live_chunks = self.peak_chunks.load(Ordering::SeqCst) as u64;
        m.peak_arena_bytes = self.peak_bytes.load(Ordering::SeqCst) as u64;
        m.chunks_sealed = self.sealed.lock().unwrap().clone();
        m.fetches_per_vertex = self.fetched.lock().unwrap().clone();
        m.cache_size_samples = self.cache_samples.lock().unwrap().clone();
    }
}
