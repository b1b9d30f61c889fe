use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread::JoinHandle;

use crossbeam_channel::{unbounded, Sender};

use crate::graph::{PartitionId, VertexId};
use crate::transport::{Transport, TransportError};

/// Data of one remote batch: lists aligned with the batch's fetch slots.
pub(crate) struct Arrival {
    pub batch: usize,
    pub result: Result<Vec<Vec<VertexId>>, TransportError>,
}

type Job = Box<dyn FnOnce() + Send + 'static>;

/// Requester threads, distinct from compute threads.
pub(crate) struct CommPool {
    tx: Option<Sender<Job>>,
    threads: Vec<JoinHandle<()>>,
}

impl CommPool {
    pub fn new(threads: usize) -> std::io::Result<Self> {
        let (tx, rx) = unbounded::<Job>();
        let threads = (0..threads.max(1))
            .map(|i| {
                let rx = rx.clone();
                std::thread::Builder::new().name(format!("requester-{i}")).spawn(move || {
                    for job in rx {
                        job();
                    }
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { tx: Some(tx), threads })
    }

    fn sender(&self) -> Sender<Job> {
        self.tx.clone().expect("pool alive")
    }

    /// Fetches the given remote batches one after another. The fetch of the
    /// next batch starts as soon as the previous one's data has arrived,
    /// independent of compute progress.
    pub fn start_pipeline(&self, transport: Arc<dyn Transport>, batches: Vec<BatchFetch>, arrivals: Sender<Arrival>) {
        if batches.is_empty() {
            return;
        }
        let chain = Arc::new(Chain { transport, batches, arrivals, pool: self.sender() });
        let _ = self.sender().send(Box::new(move || chain.step(0)));
    }
}

impl Drop for CommPool {
    fn drop(&mut self) {
        self.tx.take();
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

pub(crate) struct BatchFetch {
    pub batch: usize,
    pub target: PartitionId,
    /// One entry per fetch slot; duplicates mean redundant fetches.
    pub vertices: Vec<VertexId>,
}

struct Chain {
    transport: Arc<dyn Transport>,
    batches: Vec<BatchFetch>,
    arrivals: Sender<Arrival>,
    pool: Sender<Job>,
}

impl Chain {
    fn step(self: Arc<Self>, i: usize) {
        let b = &self.batches[i];
        let result = fetch_slots(&*self.transport, b.target, &b.vertices);
        let failed = result.is_err();
        if self.arrivals.send(Arrival { batch: b.batch, result }).is_err() || failed {
            return;
        }
        if i + 1 < self.batches.len() {
            let next = self.clone();
            let _ = self.pool.send(Box::new(move || next.step(i + 1)));
        }
    }
}

/// Fetches one list per entry of `vertices`. A vertex listed `m` times is
/// requested in `m` separate messages; each message carries a sorted,
/// duplicate-free vertex list, so a batch without duplicates costs exactly
/// one request.
pub(crate) fn fetch_slots(t: &dyn Transport, target: PartitionId, vertices: &[VertexId]) -> Result<Vec<Vec<VertexId>>, TransportError> {
    let mut positions: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        positions.entry(v).or_default().push(i);
    }
    let rounds = positions.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Vec::new(); vertices.len()];
    for r in 0..rounds {
        let round: Vec<VertexId> = positions.iter().filter(|(_, p)| p.len() > r).map(|(&v, _)| v).collect();
        let resp = t.fetch_batch(target, &round)?;
        for (v, list) in resp.lists {
            out[positions[&v][r]] = list;
        }
    }
    Ok(out)
}
