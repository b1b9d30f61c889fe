use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use crossbeam_channel::{bounded, unbounded, RecvTimeoutError, Sender};

use crate::graph::{PartitionId, PartitionedGraph, VertexId};

use super::wire::Message;
use super::{
    check_response, serve_frame, FetchResponse, GatherCoordinator, Semaphore, TrafficCounters, TrafficSnapshot,
    Transport, TransportError, TransportOptions,
};

enum Envelope {
    Request { frame: Vec<u8>, reply: Sender<Vec<u8>> },
    Shutdown,
}

/// Factory for N endpoints wired together with channels.
pub struct InProcessCluster;

impl InProcessCluster {
    /// Starts one responder thread per partition and returns the endpoints,
    /// indexed by partition.
    pub fn start(graphs: Vec<Arc<PartitionedGraph>>, opts: TransportOptions) -> Result<Vec<InProcessEndpoint>, TransportError> {
        let n = graphs.len();
        if n == 0 {
            return Err(TransportError::Config("no partitions".into()));
        }
        for (i, g) in graphs.iter().enumerate() {
            if g.my_partition() != i || g.num_partitions() != n {
                return Err(TransportError::Config(format!("graph {i} is partition {} of {}", g.my_partition(), g.num_partitions())));
            }
        }
        let gather = Arc::new(GatherCoordinator::new(n, opts.timeout));
        let mut inboxes = Vec::with_capacity(n);
        let mut responders = Vec::with_capacity(n);
        let counters: Vec<Arc<TrafficCounters>> = (0..n).map(|_| Arc::default()).collect();
        for (p, graph) in graphs.into_iter().enumerate() {
            let (tx, rx) = unbounded::<Envelope>();
            let c = counters[p].clone();
            let h = std::thread::Builder::new()
                .name(format!("responder-{p}"))
                .spawn(move || {
                    for env in rx {
                        match env {
                            Envelope::Request { frame, reply } => {
                                let resp = serve_frame(&graph, &frame);
                                c.on_served(frame.len(), resp.len());
                                let _ = reply.send(resp);
                            }
                            Envelope::Shutdown => break,
                        }
                    }
                })?;
            inboxes.push(tx);
            responders.push(h);
        }
        Ok(responders
            .into_iter()
            .enumerate()
            .map(|(p, h)| InProcessEndpoint {
                me: p,
                peers: inboxes.clone(),
                permits: (0..n).map(|_| Semaphore::new(opts.max_outstanding)).collect(),
                counters: counters[p].clone(),
                gather: gather.clone(),
                next_id: AtomicU64::new(1),
                opts,
                responder: Some(h),
            })
            .collect())
    }
}

pub struct InProcessEndpoint {
    me: PartitionId,
    peers: Vec<Sender<Envelope>>,
    permits: Vec<Semaphore>,
    counters: Arc<TrafficCounters>,
    gather: Arc<GatherCoordinator>,
    next_id: AtomicU64,
    opts: TransportOptions,
    responder: Option<JoinHandle<()>>,
}

impl InProcessEndpoint {
    /// Stops this endpoint's responder. Later fetches aimed at it fail with
    /// `Disconnected`.
    pub fn shutdown(&mut self) {
        if let Some(h) = self.responder.take() {
            let _ = self.peers[self.me].send(Envelope::Shutdown);
            let _ = h.join();
        }
    }
}

impl Drop for InProcessEndpoint {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl Transport for InProcessEndpoint {
    fn my_partition(&self) -> PartitionId {
        self.me
    }

    fn num_partitions(&self) -> usize {
        self.peers.len()
    }

    fn fetch_batch(&self, target: PartitionId, vertices: &[VertexId]) -> Result<FetchResponse, TransportError> {
        if vertices.is_empty() {
            return Ok(FetchResponse::default());
        }
        let peer = self.peers.get(target).ok_or_else(|| TransportError::Config(format!("no partition {target}")))?;
        let _permit = self.permits[target].acquire();
        let request_id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let frame = Message::FetchRequest { request_id, requester: self.me as u64, vertices: vertices.to_vec() }.encode();
        let (tx, rx) = bounded(1);
        self.counters.on_request_sent(frame.len());
        peer.send(Envelope::Request { frame, reply: tx }).map_err(|_| TransportError::Disconnected { partition: target })?;
        let resp = match rx.recv_timeout(self.opts.timeout) {
            Ok(r) => r,
            Err(RecvTimeoutError::Timeout) => return Err(TransportError::Timeout { partition: target }),
            Err(RecvTimeoutError::Disconnected) => return Err(TransportError::Disconnected { partition: target }),
        };
        let reply = Message::decode(&resp)?;
        let lists = match &reply {
            Message::FetchResponse { lists, .. } => lists.len(),
            _ => 0,
        };
        self.counters.on_response_received(resp.len(), lists);
        check_response(target, request_id, vertices, reply)
    }

    fn all_gather(&self, values: &[u64]) -> Result<Vec<Vec<u64>>, TransportError> {
        Ok((*self.gather.contribute(self.me, values.to_vec())?).clone())
    }

    fn counters(&self) -> TrafficSnapshot {
        self.counters.snapshot()
    }

    fn abort(&self, reason: &str) {
        self.gather.poison(reason);
    }
}
