use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use crate::graph::VertexId;

/// Result of [`EdgeListCache::get_or_insert`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit(Arc<[VertexId]>),
    MissInserted,
    MissSkipped,
}

/// Static edge-list cache: first accessed, first cached, above a degree
/// threshold, never evicted.
///
/// Once an insertion would exceed the capacity the cache is marked full and
/// accepts nothing else. Shared by every chunk and thread of a worker.
pub struct EdgeListCache {
    capacity_bytes: usize,
    degree_threshold: usize,
    map: RwLock<HashMap<VertexId, Arc<[VertexId]>>>,
    bytes: AtomicUsize,
    full: AtomicBool,
    hits: AtomicU64,
    misses: AtomicU64,
    inserted: AtomicU64,
}

fn list_bytes(len: usize) -> usize {
    len * std::mem::size_of::<VertexId>()
}

impl EdgeListCache {
    pub fn new(capacity_bytes: usize, degree_threshold: usize) -> Self {
        Self {
            capacity_bytes,
            degree_threshold,
            map: RwLock::new(HashMap::new()),
            bytes: AtomicUsize::new(0),
            full: AtomicBool::new(false),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            inserted: AtomicU64::new(0),
        }
    }

    pub fn capacity_bytes(&self) -> usize {
        self.capacity_bytes
    }

    pub fn degree_threshold(&self) -> usize {
        self.degree_threshold
    }

    pub fn size_bytes(&self) -> usize {
        self.bytes.load(Ordering::Acquire)
    }

    pub fn is_full(&self) -> bool {
        self.full.load(Ordering::Acquire)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn inserted(&self) -> u64 {
        self.inserted.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Query before fetching; counts a hit or a miss.
    pub fn get(&self, v: VertexId) -> Option<Arc<[VertexId]>> {
        let found = self.map.read().unwrap().get(&v).cloned();
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    /// Offers a freshly fetched list. Returns whether it was stored.
    ///
    /// Concurrent inserts of the same vertex keep the first one.
    pub fn insert(&self, v: VertexId, list: &[VertexId]) -> bool {
        if list.len() <= self.degree_threshold || self.is_full() {
            return false;
        }
        let size = list_bytes(list.len());
        let mut map = self.map.write().unwrap();
        if map.contains_key(&v) || self.is_full() {
            return false;
        }
        let used = self.bytes.load(Ordering::Acquire);
        if used + size > self.capacity_bytes {
            self.full.store(true, Ordering::Release);
            return false;
        }
        map.insert(v, Arc::from(list));
        self.bytes.store(used + size, Ordering::Release);
        self.inserted.fetch_add(1, Ordering::Relaxed);
        true
    }

    /// Lookup, and when `fetched` is given after a miss, an insertion attempt.
    pub fn get_or_insert(&self, v: VertexId, fetched: Option<&[VertexId]>) -> CacheOutcome {
        if let Some(hit) = self.get(v) {
            return CacheOutcome::Hit(hit);
        }
        match fetched {
            Some(list) if self.insert(v, list) => CacheOutcome::MissInserted,
            _ => CacheOutcome::MissSkipped,
        }
    }
}
