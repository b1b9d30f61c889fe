use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, AtomicU32, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crossbeam_channel::unbounded;
use smallvec::SmallVec;

use crate::graph::{PartitionedGraph, VertexId};
use crate::plan::{extend, ChildSet, EmbeddingAccess, ExtendOptions, ExtendStats, MatchPlan, Scratch};
use crate::sharing::{Claim, DedupTable, EdgeListCache};
use crate::transport::Transport;

use super::chunk::{Chunk, EmbeddingState, FetchSlot, Filler, Record, Slot, NO_PARENT, RECORD_BYTES, WORD_BYTES};
use super::comm::{BatchFetch, CommPool};
use super::metrics::Counters;
use super::schedule::{circulant_batch, circulant_order};
use super::{EngineConfig, EngineError};

/// A parent whose children are computed but not all inserted yet.
pub(crate) struct Parked {
    pub parent: u32,
    pub children: ChildSet,
    pub next: usize,
}

/// Resume point into a sealed chunk.
#[derive(Default)]
pub(crate) struct Progress {
    /// Next position in the chunk's circulant order.
    pub pos: usize,
    pub parked: Vec<Parked>,
    /// Popped by a compute thread after the next chunk filled up.
    pub returned: Vec<u32>,
}

struct View<'s> {
    vertices: &'s [VertexId],
    lists: SmallVec<[&'s [VertexId]; 6]>,
    reuse: Option<&'s [VertexId]>,
    ready: bool,
}

impl EmbeddingAccess for View<'_> {
    fn level(&self) -> usize {
        self.vertices.len() - 1
    }
    fn vertex(&self, p: usize) -> VertexId {
        self.vertices[p]
    }
    fn edge_list(&self, p: usize) -> &[VertexId] {
        self.lists[p]
    }
    fn reuse(&self) -> Option<&[VertexId]> {
        self.reuse
    }
    fn is_ready(&self) -> bool {
        self.ready
    }
}

enum NewSlot {
    Inactive,
    Local,
    Sibling(u32),
    Cached(Arc<[VertexId]>),
    Fetch,
}

/// Explores one plan on one worker.
pub(crate) struct Explorer<'a> {
    pub graph: &'a PartitionedGraph,
    pub transport: &'a Arc<dyn Transport>,
    pub cfg: &'a EngineConfig,
    pub plan: &'a MatchPlan,
    pub cache: Option<&'a EdgeListCache>,
    pub pool: Option<&'a rayon::ThreadPool>,
    pub comm: &'a CommPool,
    pub counters: &'a Counters,
    pub matches: AtomicU64,
}

impl<'a> Explorer<'a> {
    /// Streams the owned vertices into root chunks and explores each one
    /// depth-first over chunks. Returns the local match count.
    pub fn run(&self) -> Result<u64, EngineError> {
        let root_label = self.plan.labels().map(|l| l[0]);
        let roots: Vec<VertexId> = self
            .graph
            .owned_vertices()
            .filter(|&v| root_label.is_none() || self.graph.label(v) == root_label)
            .collect();
        let slot0 = if self.plan.is_active(0, 0) { Slot::Local } else { Slot::Inactive };
        let mut stack: Vec<Chunk> = Vec::with_capacity(self.plan.k());
        let mut next = 0;
        while next < roots.len() {
            let mut root = Chunk::new(0, self.cfg.chunk_bytes);
            while next < roots.len() && root.fits(RECORD_BYTES) {
                let rec = Record {
                    parent: NO_PARENT,
                    vertices: SmallVec::from_slice(&[roots[next]]),
                    slots: SmallVec::from_elem(slot0.clone(), 1),
                    reuse: None,
                    state: AtomicU8::new(EmbeddingState::Pending as u8),
                    pending_children: AtomicU32::new(0),
                };
                root.push(rec, RECORD_BYTES);
                Counters::bump(&self.counters.created);
                next += 1;
            }
            if root.records.is_empty() {
                return Err(EngineError::ChunkTooSmall { required: RECORD_BYTES, configured: self.cfg.chunk_bytes });
            }
            self.counters.observe_live(1, root.used);
            self.seal(&mut root);
            stack.push(root);
            self.explore_level(&mut stack)?;
            let done = stack.pop().unwrap();
            self.release(done)?;
        }
        Ok(self.matches.load(Ordering::SeqCst))
    }

    fn explore_level(&self, stack: &mut Vec<Chunk>) -> Result<(), EngineError> {
        let i = stack.len() - 1;
        let mut prog = Progress::default();
        if i + 2 >= self.plan.k() {
            // children of this level are complete matches: emit only
            let exhausted = self.fill_next_chunk(stack, &mut prog, None)?;
            debug_assert!(exhausted);
            return Ok(());
        }
        loop {
            let dedup = self.cfg.sharing.horizontal_sharing.then(|| DedupTable::new(self.cfg.dedup_bits));
            let filler = Mutex::new(Filler::new(i + 1, self.cfg.chunk_bytes, dedup));
            let exhausted = self.fill_next_chunk(stack, &mut prog, Some(&filler))?;
            let mut child = filler.into_inner().unwrap().chunk;
            let bytes: usize = stack.iter().map(|c| c.used).sum::<usize>() + child.used;
            self.counters.observe_live(stack.len() + 1, bytes);
            if !child.records.is_empty() {
                self.seal(&mut child);
                stack.push(child);
                self.explore_level(stack)?;
                let done = stack.pop().unwrap();
                self.release(done)?;
            }
            if exhausted {
                return Ok(());
            }
        }
    }

    /// Extends ready embeddings of the top chunk, inserting children into
    /// `filler` until it is full or the chunk is exhausted. Returns whether
    /// the chunk is exhausted; otherwise `prog` records where to resume.
    pub(crate) fn fill_next_chunk(
        &self,
        stack: &mut [Chunk],
        prog: &mut Progress,
        filler: Option<&Mutex<Filler>>,
    ) -> Result<bool, EngineError> {
        let i = stack.len() - 1;
        if let Some(f) = filler {
            let mut parked = std::mem::take(&mut prog.parked).into_iter();
            while let Some(mut item) = parked.next() {
                let mut g = f.lock().unwrap();
                match self.insert_children(stack, &mut g, &item)? {
                    None => self.retire_extended(stack, i, item.parent)?,
                    Some(at) => {
                        item.next = at;
                        prog.parked.push(item);
                        prog.parked.extend(parked);
                        return Ok(false);
                    }
                }
            }
        }
        let returned = std::mem::take(&mut prog.returned);
        if !returned.is_empty() {
            let (consumed, stopped) = self.compute(stack, &returned, filler, prog)?;
            prog.returned.extend_from_slice(&returned[consumed..]);
            if stopped {
                return Ok(false);
            }
        }
        while prog.pos < stack[i].order.len() {
            let b = stack[i].batch_of_position(prog.pos);
            self.ensure_ready(&mut stack[i], b)?;
            let end = stack[i].bounds[b + 1];
            let work = stack[i].order[prog.pos..end].to_vec();
            let (consumed, stopped) = self.compute(stack, &work, filler, prog)?;
            prog.pos += consumed;
            if stopped {
                return Ok(false);
            }
        }
        Ok(prog.parked.is_empty() && prog.returned.is_empty())
    }

    /// Runs `work` (indices into the top chunk) through the compute threads.
    /// Returns how many items were popped and whether the next chunk filled.
    fn compute(
        &self,
        stack: &[Chunk],
        work: &[u32],
        filler: Option<&Mutex<Filler>>,
        prog: &mut Progress,
    ) -> Result<(usize, bool), EngineError> {
        let shared = Shared {
            counter: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
            failure: Mutex::new(None),
            parked: Mutex::new(Vec::new()),
            returned: Mutex::new(Vec::new()),
        };
        match self.pool {
            Some(pool) if self.cfg.compute_threads > 1 && work.len() > self.cfg.mini_batch => pool.scope(|s| {
                for _ in 0..self.cfg.compute_threads {
                    s.spawn(|_| self.compute_worker(stack, work, filler, &shared));
                }
            }),
            _ => self.compute_worker(stack, work, filler, &shared),
        }
        if let Some(e) = shared.failure.into_inner().unwrap() {
            return Err(e);
        }
        prog.parked.extend(shared.parked.into_inner().unwrap());
        prog.returned.extend(shared.returned.into_inner().unwrap());
        Ok((shared.counter.load(Ordering::SeqCst).min(work.len()), shared.stop.load(Ordering::SeqCst)))
    }

    fn compute_worker(&self, stack: &[Chunk], work: &[u32], filler: Option<&Mutex<Filler>>, sh: &Shared) {
        let level = stack.len() - 1;
        let opts = ExtendOptions { computation_reuse: self.cfg.sharing.computation_reuse, labels: self.graph.labels() };
        let mut scratch = Scratch::default();
        let mut stats = ExtendStats::default();
        let mut buffer: Vec<Parked> = Vec::new();
        let mut buffered = 0usize;
        let mut matches = 0u64;
        let mb = self.cfg.mini_batch.max(1);
        let fail = |e: EngineError| {
            sh.failure.lock().unwrap().get_or_insert(e);
            sh.stop.store(true, Ordering::SeqCst);
        };
        'outer: while !sh.stop.load(Ordering::SeqCst) {
            let a = sh.counter.fetch_add(mb, Ordering::SeqCst);
            if a >= work.len() {
                break;
            }
            let b = (a + mb).min(work.len());
            for t in a..b {
                if sh.stop.load(Ordering::SeqCst) {
                    sh.returned.lock().unwrap().extend_from_slice(&work[t..b]);
                    break 'outer;
                }
                let idx = work[t];
                let view = self.view(stack, level, idx);
                let set = match extend(self.plan, &view, opts, &mut scratch, &mut stats, |_, _| matches += 1) {
                    Ok(s) => s,
                    Err(e) => {
                        fail(e.into());
                        break 'outer;
                    }
                };
                if set.is_empty() {
                    if let Err(e) = self.retire_extended(stack, level, idx) {
                        fail(e);
                        break 'outer;
                    }
                    continue;
                }
                let Some(f) = filler else {
                    fail(EngineError::Lifecycle(format!("level {level} is emit-only but produced children")));
                    break 'outer;
                };
                buffered += set.vertices.len();
                buffer.push(Parked { parent: idx, children: set, next: 0 });
                if buffered >= self.cfg.insertion_buffer {
                    if let Err(e) = self.flush(stack, f, &mut buffer, sh) {
                        fail(e);
                        break 'outer;
                    }
                    buffered = 0;
                }
            }
        }
        if let Some(f) = filler {
            if !buffer.is_empty() && sh.failure.lock().unwrap().is_none() {
                if let Err(e) = self.flush(stack, f, &mut buffer, sh) {
                    fail(e);
                }
            }
        }
        self.matches.fetch_add(matches, Ordering::Relaxed);
        self.counters.intersections.fetch_add(stats.intersections, Ordering::Relaxed);
        self.counters.differences.fetch_add(stats.differences, Ordering::Relaxed);
    }

    fn flush(&self, stack: &[Chunk], filler: &Mutex<Filler>, buffer: &mut Vec<Parked>, sh: &Shared) -> Result<(), EngineError> {
        let level = stack.len() - 1;
        let mut g = filler.lock().unwrap();
        for mut item in buffer.drain(..) {
            if g.full {
                sh.parked.lock().unwrap().push(item);
                continue;
            }
            match self.insert_children(stack, &mut g, &item)? {
                None => self.retire_extended(stack, level, item.parent)?,
                Some(at) => {
                    item.next = at;
                    sh.parked.lock().unwrap().push(item);
                    sh.stop.store(true, Ordering::SeqCst);
                }
            }
        }
        Ok(())
    }

    /// Inserts the children of `item` starting at `item.next`. Returns the
    /// first child that did not fit, if any.
    fn insert_children(&self, stack: &[Chunk], f: &mut Filler, item: &Parked) -> Result<Option<usize>, EngineError> {
        let reuse = item.children.reuse.as_deref();
        for c in item.next..item.children.vertices.len() {
            if !self.try_insert(stack, f, item.parent, item.children.vertices[c], reuse)? {
                f.full = true;
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// Binds every active slot of a new child and charges its bytes to the
    /// chunk. Only the new vertex's list may need a fetch; earlier positions
    /// refer to (or, without vertical reuse, copy from) the parent.
    fn try_insert(
        &self,
        stack: &[Chunk],
        f: &mut Filler,
        parent_idx: u32,
        v: VertexId,
        reuse: Option<&[VertexId]>,
    ) -> Result<bool, EngineError> {
        let lvl = f.chunk.level;
        let pl = lvl - 1;
        let vertical = self.cfg.sharing.vertical_reuse;
        let idx = f.chunk.records.len() as u32;

        let mut cost = RECORD_BYTES;
        let reuse_new = match reuse {
            Some(r) if !f.reuse_at.contains_key(&parent_idx) => {
                cost += r.len() * WORD_BYTES;
                true
            }
            _ => false,
        };
        if !vertical {
            for p in (0..lvl).filter(|&p| self.plan.is_active(lvl, p)) {
                cost += self.list(stack, pl, parent_idx, p).len() * WORD_BYTES;
            }
        }
        let mut claim = None;
        let new = if !self.plan.is_active(lvl, lvl) {
            NewSlot::Inactive
        } else if self.graph.is_local(v) {
            NewSlot::Local
        } else {
            claim = f.dedup.as_ref().map(|t| t.lookup_or_claim(v, idx));
            match claim {
                Some(Claim::Shared(owner)) => NewSlot::Sibling(owner),
                _ => match self.cache.and_then(|c| c.get(v)) {
                    Some(list) => NewSlot::Cached(list),
                    None => {
                        cost += self.graph.degree(v) * WORD_BYTES;
                        NewSlot::Fetch
                    }
                },
            }
        };
        if !f.chunk.fits(cost) {
            if claim == Some(Claim::Claimed) {
                f.dedup.as_ref().unwrap().unclaim(v, idx);
            }
            if f.chunk.records.is_empty() {
                return Err(EngineError::ChunkTooSmall { required: cost, configured: f.chunk.budget });
            }
            return Ok(false);
        }

        if reuse_new {
            let at = f.chunk.store_words(reuse.unwrap());
            f.reuse_at.insert(parent_idx, at);
        }
        let parent = &stack[pl].records[parent_idx as usize];
        let mut slots: SmallVec<[Slot; 6]> = SmallVec::with_capacity(lvl + 1);
        for p in 0..lvl {
            slots.push(if !self.plan.is_active(lvl, p) {
                Slot::Inactive
            } else if vertical {
                Slot::Parent
            } else {
                let (off, len) = f.chunk.store_words(self.list(stack, pl, parent_idx, p));
                Slot::Copied { off, len }
            });
        }
        slots.push(match new {
            NewSlot::Inactive => Slot::Inactive,
            NewSlot::Local => Slot::Local,
            NewSlot::Sibling(o) => {
                Counters::bump(&self.counters.shared);
                self.counters.add(&self.counters.dedup_saved, wire_list_bytes(self.graph.degree(v)));
                Slot::Sibling(o)
            }
            NewSlot::Cached(list) => {
                self.counters.add(&self.counters.cache_saved, wire_list_bytes(list.len()));
                Slot::Cached(list)
            }
            NewSlot::Fetch => {
                if claim == Some(Claim::Dropped) {
                    Counters::bump(&self.counters.dropped);
                }
                f.chunk.fetches.push(FetchSlot { vertex: v, data: Vec::new() });
                Slot::Fetched(f.chunk.fetches.len() as u32 - 1)
            }
        });
        let mut vertices = parent.vertices.clone();
        vertices.push(v);
        let rec = Record {
            parent: parent_idx,
            vertices,
            slots,
            reuse: reuse.and_then(|_| f.reuse_at.get(&parent_idx).copied()),
            state: AtomicU8::new(EmbeddingState::Pending as u8),
            pending_children: AtomicU32::new(0),
        };
        f.chunk.push(rec, cost);
        parent.pending_children.fetch_add(1, Ordering::SeqCst);
        Counters::bump(&self.counters.created);
        Ok(true)
    }

    /// Edge list of position `p` of embedding `idx` at `level`.
    fn list<'s>(&self, stack: &'s [Chunk], mut level: usize, mut idx: u32, p: usize) -> &'s [VertexId]
    where
        'a: 's,
    {
        loop {
            let chunk = &stack[level];
            let rec = &chunk.records[idx as usize];
            match &rec.slots[p] {
                Slot::Parent => {
                    idx = rec.parent;
                    level -= 1;
                }
                Slot::Sibling(o) => idx = *o,
                Slot::Copied { off, len } => return chunk.words(*off, *len),
                Slot::Local => return self.graph.owned_list(rec.vertices[p]),
                Slot::Cached(list) => return list,
                Slot::Fetched(s) => return &chunk.fetches[*s as usize].data,
                Slot::Inactive => return &[],
            }
        }
    }

    fn view<'s>(&self, stack: &'s [Chunk], level: usize, idx: u32) -> View<'s>
    where
        'a: 's,
    {
        let chunk = &stack[level];
        let rec = &chunk.records[idx as usize];
        View {
            vertices: &rec.vertices,
            lists: (0..=level)
                .map(|p| if self.plan.is_active(level, p) { self.list(stack, level, idx, p) } else { &[][..] })
                .collect(),
            reuse: rec.reuse.map(|(off, len)| chunk.words(off, len)),
            ready: rec.state() == EmbeddingState::Ready,
        }
    }

    /// READY -> ZOMBIE once all children are in the next chunk; terminates
    /// right away when none are alive.
    fn retire_extended(&self, stack: &[Chunk], level: usize, idx: u32) -> Result<(), EngineError> {
        let rec = &stack[level].records[idx as usize];
        if !rec.transition(EmbeddingState::Ready, EmbeddingState::Zombie) {
            return Err(EngineError::Lifecycle(format!("level {level} embedding retired from {:?}", rec.state())));
        }
        Counters::bump(&self.counters.zombie);
        if rec.pending_children.load(Ordering::SeqCst) == 0 {
            self.terminate(stack, level, idx);
        }
        Ok(())
    }

    /// ZOMBIE -> TERMINATED, cascading to parents whose last child this was.
    fn terminate(&self, stack: &[Chunk], mut level: usize, mut idx: u32) {
        loop {
            let chunk = &stack[level];
            let rec = &chunk.records[idx as usize];
            if !rec.transition(EmbeddingState::Zombie, EmbeddingState::Terminated) {
                return;
            }
            Counters::bump(&self.counters.terminated);
            chunk.live.fetch_sub(1, Ordering::SeqCst);
            if level == 0 {
                return;
            }
            let parent = &stack[level - 1].records[rec.parent as usize];
            if parent.pending_children.fetch_sub(1, Ordering::SeqCst) == 1 && parent.state() == EmbeddingState::Zombie {
                idx = rec.parent;
                level -= 1;
            } else {
                return;
            }
        }
    }

    /// Assigns circulant batches and starts the fetch pipeline.
    fn seal(&self, chunk: &mut Chunk) {
        let n = self.graph.num_partitions();
        let me = self.graph.my_partition();
        let batch = |v: VertexId| circulant_batch(self.graph.owner(v), me, n);
        let (order, bounds) = circulant_order(chunk.records.iter().map(|r| batch(r.new_vertex())), n);
        chunk.order = order;
        chunk.bounds = bounds;
        let mut per_batch = vec![Vec::new(); n];
        for (s, f) in chunk.fetches.iter().enumerate() {
            per_batch[batch(f.vertex)].push(s as u32);
        }
        let remote: Vec<BatchFetch> = (1..n)
            .filter(|&j| !per_batch[j].is_empty())
            .map(|j| BatchFetch {
                batch: j,
                target: (me + j) % n,
                vertices: per_batch[j].iter().map(|&s| chunk.fetches[s as usize].vertex).collect(),
            })
            .collect();
        chunk.batch_fetches = per_batch;
        chunk.ready = vec![false; n];
        if !remote.is_empty() {
            let (tx, rx) = unbounded();
            chunk.arrivals = Some(rx);
            self.comm.start_pipeline(self.transport.clone(), remote, tx);
        }
        self.counters.sealed(chunk.level);
        if let Some(c) = self.cache {
            self.counters.cache_samples.lock().unwrap().push(c.size_bytes() as u64);
        }
    }

    /// Blocks until batch `b`'s data is in place, consuming earlier arrivals.
    fn ensure_ready(&self, chunk: &mut Chunk, b: usize) -> Result<(), EngineError> {
        while !chunk.ready[b] {
            if b == 0 || chunk.batch_fetches[b].is_empty() {
                self.mark_ready(chunk, b)?;
                break;
            }
            let arrival = chunk
                .arrivals
                .as_ref()
                .and_then(|rx| rx.recv().ok())
                .ok_or_else(|| EngineError::Protocol("fetch pipeline stopped early".into()))?;
            let lists = arrival.result?;
            let j = arrival.batch;
            if lists.len() != chunk.batch_fetches[j].len() {
                return Err(EngineError::Protocol(format!("batch {j}: {} lists for {} requests", lists.len(), chunk.batch_fetches[j].len())));
            }
            let slots = std::mem::take(&mut chunk.batch_fetches[j]);
            {
                let mut fetched = self.counters.fetched.lock().unwrap();
                for (&s, list) in slots.iter().zip(lists) {
                    let slot = &mut chunk.fetches[s as usize];
                    if list.len() != self.graph.degree(slot.vertex) {
                        return Err(EngineError::Protocol(format!(
                            "vertex {} arrived with {} neighbors, degree is {}",
                            slot.vertex,
                            list.len(),
                            self.graph.degree(slot.vertex)
                        )));
                    }
                    *fetched.entry(slot.vertex).or_default() += 1;
                    if let Some(c) = self.cache {
                        c.insert(slot.vertex, &list);
                    }
                    slot.data = list;
                }
            }
            chunk.batch_fetches[j] = slots;
            self.mark_ready(chunk, j)?;
        }
        Ok(())
    }

    fn mark_ready(&self, chunk: &mut Chunk, j: usize) -> Result<(), EngineError> {
        for &idx in &chunk.order[chunk.bounds[j]..chunk.bounds[j + 1]] {
            if !chunk.records[idx as usize].transition(EmbeddingState::Pending, EmbeddingState::Ready) {
                return Err(EngineError::Lifecycle(format!("embedding {idx} of level {} made ready twice", chunk.level)));
            }
            Counters::bump(&self.counters.ready);
        }
        chunk.ready[j] = true;
        Ok(())
    }

    /// Frees a fully explored chunk; every embedding must be terminated.
    fn release(&self, chunk: Chunk) -> Result<(), EngineError> {
        let live = chunk.live.load(Ordering::SeqCst);
        if live != 0 {
            return Err(EngineError::Lifecycle(format!("level {} chunk released with {live} live embeddings", chunk.level)));
        }
        Ok(())
    }
}

struct Shared {
    counter: AtomicUsize,
    stop: AtomicBool,
    failure: Mutex<Option<EngineError>>,
    parked: Mutex<Vec<Parked>>,
    returned: Mutex<Vec<u32>>,
}

/// Neighbor-list bytes a fetch response carries for a list of `degree`.
fn wire_list_bytes(degree: usize) -> u64 {
    degree as u64 * 8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CanonicalGraph;
    use crate::plan::clique_plan;
    use crate::transport::{InProcessCluster, TransportOptions};

    fn single(g: &CanonicalGraph) -> (PartitionedGraph, Arc<dyn Transport>) {
        let p = g.partition(1).unwrap().remove(0);
        let ep = InProcessCluster::start(vec![Arc::new(p.clone())], TransportOptions::default()).unwrap().remove(0);
        (p, Arc::new(ep))
    }

    #[test]
    fn fill_parks_mid_embedding_and_resumes() {
        // center 0 with leaves 1..=5: the root has 5 triangle-plan children
        let g = CanonicalGraph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        let (graph, transport) = single(&g);
        let plan = clique_plan(3).unwrap();
        let cfg = EngineConfig { chunk_bytes: 2 * RECORD_BYTES, compute_threads: 1, ..EngineConfig::default() };
        let comm = CommPool::new(1).unwrap();
        let counters = Counters::default();
        let ex = Explorer {
            graph: &graph,
            transport: &transport,
            cfg: &cfg,
            plan: &plan,
            cache: None,
            pool: None,
            comm: &comm,
            counters: &counters,
            matches: AtomicU64::new(0),
        };
        let mut root = Chunk::new(0, 1 << 20);
        root.push(
            Record {
                parent: NO_PARENT,
                vertices: SmallVec::from_slice(&[0]),
                slots: SmallVec::from_elem(Slot::Local, 1),
                reuse: None,
                state: AtomicU8::new(EmbeddingState::Pending as u8),
                pending_children: AtomicU32::new(0),
            },
            RECORD_BYTES,
        );
        ex.seal(&mut root);
        let mut stack = vec![root];
        let mut prog = Progress::default();
        let mut seen = Vec::new();
        let mut rounds = 0;
        loop {
            let f = Mutex::new(Filler::new(1, cfg.chunk_bytes, None));
            let exhausted = ex.fill_next_chunk(&mut stack, &mut prog, Some(&f)).unwrap();
            let chunk = f.into_inner().unwrap().chunk;
            seen.push(chunk.records.iter().map(|r| r.new_vertex()).collect::<Vec<_>>());
            rounds += 1;
            if rounds == 1 {
                assert!(!exhausted);
                assert_eq!(prog.parked.len(), 1);
                assert_eq!(prog.parked[0].next, 2);
                assert_eq!(stack[0].records[0].state(), EmbeddingState::Ready);
            }
            if exhausted {
                break;
            }
        }
        assert_eq!(seen, vec![vec![1, 2], vec![3, 4], vec![5]]);
        assert_eq!(stack[0].records[0].state(), EmbeddingState::Zombie);
        assert_eq!(stack[0].records[0].pending_children.load(Ordering::SeqCst), 5);
    }

    #[test]
    fn empty_chunk_fill_is_a_noop() {
        let g = CanonicalGraph::from_edges(2, &[(0, 1)]);
        let (graph, transport) = single(&g);
        let plan = clique_plan(3).unwrap();
        let cfg = EngineConfig { compute_threads: 1, ..EngineConfig::default() };
        let comm = CommPool::new(1).unwrap();
        let counters = Counters::default();
        let ex = Explorer {
            graph: &graph,
            transport: &transport,
            cfg: &cfg,
            plan: &plan,
            cache: None,
            pool: None,
            comm: &comm,
            counters: &counters,
            matches: AtomicU64::new(0),
        };
        let mut root = Chunk::new(0, 1 << 20);
        ex.seal(&mut root);
        let mut stack = vec![root];
        let f = Mutex::new(Filler::new(1, 1 << 20, None));
        assert!(ex.fill_next_chunk(&mut stack, &mut Progress::default(), Some(&f)).unwrap());
        assert!(f.into_inner().unwrap().chunk.records.is_empty());
    }
}
