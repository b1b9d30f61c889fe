use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU8, AtomicUsize, Ordering};
use std::sync::Arc;

use crossbeam_channel::Receiver;
use smallvec::SmallVec;

use crate::graph::VertexId;
use crate::sharing::DedupTable;

use super::comm::Arrival;

/// Lifecycle of an extendable embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum EmbeddingState {
    /// Created; the new vertex's edge list may still be in flight.
    Pending = 0,
    /// All active edge lists are available; may be extended.
    Ready = 1,
    /// Extended, children may still be alive.
    Zombie = 2,
    /// Extended and every child terminated.
    Terminated = 3,
}

impl EmbeddingState {
    pub(crate) fn from_u8(x: u8) -> Self {
        match x {
            0 => Self::Pending,
            1 => Self::Ready,
            2 => Self::Zombie,
            _ => Self::Terminated,
        }
    }
}

/// Where the edge list of one embedding position lives.
#[derive(Debug, Clone)]
pub(crate) enum Slot {
    Inactive,
    /// Same position of the parent embedding.
    Parent,
    /// Copied into this chunk's word region.
    Copied { off: u32, len: u32 },
    /// Owned by this worker's partition.
    Local,
    Cached(Arc<[VertexId]>),
    /// Same position of another embedding of this chunk.
    Sibling(u32),
    /// Fetched into the chunk's fetch slot with this index.
    Fetched(u32),
}

pub(crate) const NO_PARENT: u32 = u32::MAX;

pub(crate) struct Record {
    pub parent: u32,
    pub vertices: SmallVec<[VertexId; 6]>,
    pub slots: SmallVec<[Slot; 6]>,
    /// Raw intersection carried for the next extension, in `words`.
    pub reuse: Option<(u32, u32)>,
    pub state: AtomicU8,
    pub pending_children: AtomicU32,
}

impl Record {
    pub fn state(&self) -> EmbeddingState {
        EmbeddingState::from_u8(self.state.load(Ordering::SeqCst))
    }

    pub fn transition(&self, from: EmbeddingState, to: EmbeddingState) -> bool {
        self.state.compare_exchange(from as u8, to as u8, Ordering::SeqCst, Ordering::SeqCst).is_ok()
    }

    pub fn new_vertex(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }
}

/// Fixed accounting cost of one embedding in a chunk arena.
pub(crate) const RECORD_BYTES: usize = std::mem::size_of::<Record>();
pub(crate) const WORD_BYTES: usize = std::mem::size_of::<VertexId>();

pub(crate) struct FetchSlot {
    pub vertex: VertexId,
    pub data: Vec<VertexId>,
}

/// Fixed-budget arena of same-level embeddings.
///
/// `used` counts record headers plus every edge-list word the chunk owns:
/// fetched lists (reserved from the replicated degree at insertion),
/// copies and stored intersections.
pub(crate) struct Chunk {
    pub level: usize,
    pub budget: usize,
    pub used: usize,
    pub records: Vec<Record>,
    pub words: Vec<VertexId>,
    pub fetches: Vec<FetchSlot>,
    /// Records not yet terminated.
    pub live: AtomicUsize,
    // filled in at seal time
    pub order: Vec<u32>,
    pub bounds: Vec<usize>,
    pub batch_fetches: Vec<Vec<u32>>,
    pub ready: Vec<bool>,
    pub arrivals: Option<Receiver<Arrival>>,
}

impl Chunk {
    pub fn new(level: usize, budget: usize) -> Self {
        Self {
            level,
            budget,
            used: 0,
            records: Vec::new(),
            words: Vec::new(),
            fetches: Vec::new(),
            live: AtomicUsize::new(0),
            order: Vec::new(),
            bounds: Vec::new(),
            batch_fetches: Vec::new(),
            ready: Vec::new(),
            arrivals: None,
        }
    }

    pub fn fits(&self, cost: usize) -> bool {
        self.used + cost <= self.budget
    }

    pub fn push(&mut self, rec: Record, cost: usize) -> u32 {
        let idx = self.records.len() as u32;
        self.records.push(rec);
        self.used += cost;
        self.live.fetch_add(1, Ordering::SeqCst);
        idx
    }

    pub fn words(&self, off: u32, len: u32) -> &[VertexId] {
        &self.words[off as usize..(off + len) as usize]
    }

    pub fn store_words(&mut self, list: &[VertexId]) -> (u32, u32) {
        let off = self.words.len() as u32;
        self.words.extend_from_slice(list);
        (off, list.len() as u32)
    }

    pub fn batch_of_position(&self, pos: usize) -> usize {
        // bounds is non-decreasing with bounds[0] = 0
        self.bounds.partition_point(|&b| b <= pos) - 1
    }
}

/// The chunk being filled, guarded by the insertion mutex.
pub(crate) struct Filler {
    pub chunk: Chunk,
    pub dedup: Option<DedupTable>,
    /// Stored intersection of each parent already written to this chunk.
    pub reuse_at: HashMap<u32, (u32, u32)>,
    pub full: bool,
}

impl Filler {
    pub fn new(level: usize, budget: usize, dedup: Option<DedupTable>) -> Self {
        Self { chunk: Chunk::new(level, budget), dedup, reuse_at: HashMap::new(), full: false }
    }
}
