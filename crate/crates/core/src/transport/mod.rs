//! Remote edge-list fetches, the responder service and the small collective
//! layer (barrier, all-gather) used to start and finish a run.
//!
//! Two backends implement [`Transport`]: [`InProcessCluster`] connects N
//! endpoints inside one process through channels, [`SocketEndpoint`] speaks
//! the same frames over TCP between processes.

mod gather;
mod inproc;
mod serve;
mod socket;
pub mod wire;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

pub use gather::GatherCoordinator;
pub use inproc::{InProcessCluster, InProcessEndpoint};
pub use serve::serve_frame;
pub use socket::{ClusterConfig, SocketEndpoint};

use crate::graph::{PartitionId, VertexId};
use wire::{ErrorCode, Message, WireError};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("timed out waiting for partition {partition}")]
    Timeout { partition: PartitionId },
    #[error("partition {partition} disconnected")]
    Disconnected { partition: PartitionId },
    #[error("vertex {vertex} is not owned by partition {partition}")]
    NotOwned { vertex: u64, partition: PartitionId },
    #[error("partition {partition} reported: {message}")]
    Remote { partition: PartitionId, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("run aborted: {0}")]
    Aborted(String),
    #[error("cluster configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lists returned by one fetch, in request order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FetchResponse {
    pub request_id: u64,
    pub lists: Vec<(VertexId, Vec<VertexId>)>,
}

/// Endpoint of one worker.
pub trait Transport: Send + Sync {
    fn my_partition(&self) -> PartitionId;

    fn num_partitions(&self) -> usize;

    /// Blocking fetch of the edge lists of `vertices` (sorted, deduplicated,
    /// all owned by `target`). One request and one response message; an
    /// empty list returns immediately without any message.
    fn fetch_batch(&self, target: PartitionId, vertices: &[VertexId]) -> Result<FetchResponse, TransportError>;

    /// Gathers one value vector per worker on worker 0 and hands the full
    /// table back to every worker. Returns only once all workers arrived.
    fn all_gather(&self, values: &[u64]) -> Result<Vec<Vec<u64>>, TransportError>;

    fn barrier(&self) -> Result<(), TransportError> {
        self.all_gather(&[]).map(|_| ())
    }

    fn counters(&self) -> TrafficSnapshot;

    /// Fails pending and future collectives so peers do not wait forever on
    /// a worker that hit an error.
    fn abort(&self, reason: &str);
}

#[derive(Debug, Clone, Copy)]
pub struct TransportOptions {
    /// Per-message wait before a peer is declared unresponsive.
    pub timeout: Duration,
    /// Outstanding fetches allowed per (requester, responder) pair.
    pub max_outstanding: usize,
    /// How long socket endpoints retry connecting to peers at startup.
    pub connect_timeout: Duration,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { timeout: Duration::from_secs(120), max_outstanding: 2, connect_timeout: Duration::from_secs(30) }
    }
}

/// Fetch traffic of one endpoint, split by role. Collective messages are
/// not counted.
#[derive(Debug, Default)]
pub struct TrafficCounters {
    request_bytes_sent: AtomicU64,
    response_bytes_received: AtomicU64,
    requests_sent: AtomicU64,
    lists_received: AtomicU64,
    request_bytes_received: AtomicU64,
    response_bytes_sent: AtomicU64,
    requests_served: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrafficSnapshot {
    pub request_bytes_sent: u64,
    pub response_bytes_received: u64,
    pub requests_sent: u64,
    pub lists_received: u64,
    pub request_bytes_received: u64,
    pub response_bytes_sent: u64,
    pub requests_served: u64,
}

impl TrafficSnapshot {
    pub fn bytes_sent(&self) -> u64 {
        self.request_bytes_sent + self.response_bytes_sent
    }

    pub fn bytes_received(&self) -> u64 {
        self.response_bytes_received + self.request_bytes_received
    }

    /// Field-wise difference, for per-phase accounting.
    pub fn since(&self, earlier: &TrafficSnapshot) -> TrafficSnapshot {
        TrafficSnapshot {
            request_bytes_sent: self.request_bytes_sent - earlier.request_bytes_sent,
            response_bytes_received: self.response_bytes_received - earlier.response_bytes_received,
            requests_sent: self.requests_sent - earlier.requests_sent,
            lists_received: self.lists_received - earlier.lists_received,
            request_bytes_received: self.request_bytes_received - earlier.request_bytes_received,
            response_bytes_sent: self.response_bytes_sent - earlier.response_bytes_sent,
            requests_served: self.requests_served - earlier.requests_served,
        }
    }
}

impl TrafficCounters {
    pub(crate) fn on_request_sent(&self, bytes: usize) {
        self.request_bytes_sent.fetch_add(bytes as u64, Ordering::Relaxed);
        self.requests_sent.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn on_response_received(&self, bytes: usize, lists: usize) {
        self.response_bytes_received.fetch_add(bytes as u64, Ordering::Relaxed);
        self.lists_received.fetch_add(lists as u64, Ordering::Relaxed);
    }

    pub(crate) fn on_served(&self, request_bytes: usize, response_bytes: usize) {
        self.request_bytes_received.fetch_add(request_bytes as u64, Ordering::Relaxed);
        self.response_bytes_sent.fetch_add(response_bytes as u64, Ordering::Relaxed);
        self.requests_served.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> TrafficSnapshot {
        let l = |a: &AtomicU64| a.load(Ordering::Relaxed);
        TrafficSnapshot {
            request_bytes_sent: l(&self.request_bytes_sent),
            response_bytes_received: l(&self.response_bytes_received),
            requests_sent: l(&self.requests_sent),
            lists_received: l(&self.lists_received),
            request_bytes_received: l(&self.request_bytes_received),
            response_bytes_sent: l(&self.response_bytes_sent),
            requests_served: l(&self.requests_served),
        }
    }
}

/// Counting semaphore capping outstanding fetches towards one peer.
pub(crate) struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

pub(crate) struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub(crate) fn new(permits: usize) -> Self {
        Self { permits: Mutex::new(permits.max(1)), cv: Condvar::new() }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut p = self.permits.lock().unwrap();
        while *p == 0 {
            p = self.cv.wait(p).unwrap();
        }
        *p -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Turns a decoded reply to `request` into a [`FetchResponse`], checking
/// that the responder answered exactly the requested vertices.
pub(crate) fn check_response(
    target: PartitionId,
    request_id: u64,
    vertices: &[VertexId],
    reply: Message,
) -> Result<FetchResponse, TransportError> {
    match reply {
        Message::FetchResponse { request_id: id, lists } => {
            if id != request_id {
                return Err(TransportError::Protocol(format!("response id {id}, expected {request_id}")));
            }
            if lists.len() != vertices.len() || lists.iter().zip(vertices).any(|((v, _), w)| v != w) {
                return Err(TransportError::Protocol(format!("partition {target} answered different vertices")));
            }
            Ok(FetchResponse { request_id, lists })
        }
        Message::Error { code: ErrorCode::NotOwned, vertex, .. } => Err(TransportError::NotOwned { vertex, partition: target }),
        Message::Error { message, .. } => Err(TransportError::Remote { partition: target, message }),
        other => Err(TransportError::Protocol(format!("unexpected reply {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::AtomicUsize;
    use std::sync::Arc;

    use super::*;

    #[test]
    fn semaphore_caps_concurrency() {
        let sem = Arc::new(Semaphore::new(2));
        let inside = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    let _p = sem.acquire();
                    let now = inside.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    inside.fetch_sub(1, Ordering::SeqCst);
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }

    #[test]
    fn mismatched_response_is_protocol_error() {
        let reply = Message::FetchResponse { request_id: 1, lists: vec![(4, vec![])] };
        assert!(matches!(check_response(1, 1, &[2], reply), Err(TransportError::Protocol(_))));
        let reply = Message::Error { request_id: 1, code: ErrorCode::NotOwned, vertex: 2, message: String::new() };
        assert!(matches!(check_response(1, 1, &[2], reply), Err(TransportError::NotOwned { vertex: 2, partition: 1 })));
    }
}
