use std::io::BufReader;
use std::net::{IpAddr, Ipv4Addr, Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crate::graph::{PartitionId, PartitionedGraph, VertexId};

use super::wire::{read_frame, write_frame, ErrorCode, Message};
use super::{
    check_response, serve_frame, FetchResponse, GatherCoordinator, TrafficCounters, TrafficSnapshot, Transport,
    TransportError, TransportOptions,
};

/// Static peer list, one `partition_id host port` line per partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterConfig {
    peers: Vec<(String, u16)>,
}

impl ClusterConfig {
    pub fn new(peers: Vec<(String, u16)>) -> Result<Self, TransportError> {
        if peers.is_empty() {
            return Err(TransportError::Config("empty cluster".into()));
        }
        Ok(Self { peers })
    }

    pub fn load(path: &Path) -> Result<Self, TransportError> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn num_partitions(&self) -> usize {
        self.peers.len()
    }

    pub fn address(&self, p: PartitionId) -> (&str, u16) {
        (&self.peers[p].0, self.peers[p].1)
    }
}

impl FromStr for ClusterConfig {
    type Err = TransportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut entries: Vec<(usize, String, u16)> = Vec::new();
        for (no, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = |why: &str| TransportError::Config(format!("line {}: {why}", no + 1));
            if f.len() != 3 {
                return Err(bad("expected `partition_id host port`"));
            }
            let id = f[0].parse().map_err(|_| bad("bad partition id"))?;
            let port = f[2].parse().map_err(|_| bad("bad port"))?;
            entries.push((id, f[1].to_string(), port));
        }
        entries.sort_by_key(|e| e.0);
        for (i, e) in entries.iter().enumerate() {
            if e.0 != i {
                return Err(TransportError::Config(format!("partition ids must be 0..N without gaps, found {}", e.0)));
            }
        }
        Self::new(entries.into_iter().map(|(_, h, p)| (h, p)).collect())
    }
}

/// Idle outgoing connections to one peer. Taking one is the backpressure
/// point: at most `connections` fetches are outstanding per peer.
struct ConnPool {
    idle: Mutex<Vec<TcpStream>>,
    cv: Condvar,
}

impl ConnPool {
    fn take(&self, timeout: Duration, partition: PartitionId) -> Result<TcpStream, TransportError> {
        let deadline = Instant::now() + timeout;
        let mut idle = self.idle.lock().unwrap();
        loop {
            if let Some(s) = idle.pop() {
                return Ok(s);
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(TransportError::Timeout { partition });
            }
            idle = self.cv.wait_timeout(idle, deadline - now).unwrap().0;
        }
    }

    fn put(&self, s: TcpStream) {
        self.idle.lock().unwrap().push(s);
        self.cv.notify_one();
    }
}

/// One worker process's endpoint over TCP.
pub struct SocketEndpoint {
    me: PartitionId,
    n: usize,
    graph: Arc<PartitionedGraph>,
    pools: Vec<Option<ConnPool>>,
    all_streams: Vec<TcpStream>,
    control: Option<Mutex<TcpStream>>,
    coordinator: Option<Arc<GatherCoordinator>>,
    counters: Arc<TrafficCounters>,
    next_id: AtomicU64,
    shutdown: Arc<AtomicBool>,
    local_addr: SocketAddr,
    accept: Option<JoinHandle<()>>,
    opts: TransportOptions,
    // open control sessions served by this endpoint (worker 0 only)
    sessions: Arc<Sessions>,
}

/// Longest wait for peers to hang up when worker 0 shuts down.
const LINGER: Duration = Duration::from_secs(10);

/// Counts peers whose control connection is still open, so worker 0 does
/// not exit before its last gather replies are written.
#[derive(Default)]
struct Sessions {
    open: Mutex<usize>,
    closed: Condvar,
}

impl Sessions {
    fn enter(&self) {
        *self.open.lock().unwrap() += 1;
    }

    fn leave(&self) {
        *self.open.lock().unwrap() -= 1;
        self.closed.notify_all();
    }

    fn wait_closed(&self, limit: Duration) {
        let open = self.open.lock().unwrap();
        let _ = self.closed.wait_timeout_while(open, limit, |n| *n > 0);
    }
}

fn connect_retry(host: &str, port: u16, deadline: Instant, partition: PartitionId) -> Result<TcpStream, TransportError> {
    loop {
        let addrs: Vec<SocketAddr> = (host, port).to_socket_addrs().map(|a| a.collect()).unwrap_or_default();
        for a in &addrs {
            if let Ok(s) = TcpStream::connect_timeout(a, Duration::from_millis(500)) {
                s.set_nodelay(true)?;
                return Ok(s);
            }
        }
        if Instant::now() >= deadline {
            return Err(TransportError::Disconnected { partition });
        }
        std::thread::sleep(Duration::from_millis(50));
    }
}

fn service(
    stream: TcpStream,
    graph: Arc<PartitionedGraph>,
    counters: Arc<TrafficCounters>,
    coordinator: Option<Arc<GatherCoordinator>>,
    sessions: Arc<Sessions>,
) {
    let mut writer = match stream.try_clone() {
        Ok(w) => w,
        Err(_) => return,
    };
    let mut reader = BufReader::new(stream);
    let mut peer: Option<PartitionId> = None;
    while let Ok(Some(frame)) = read_frame(&mut reader) {
        let reply = match Message::decode(&frame) {
            Ok(Message::Gather { request_id, partition, values }) => {
                if peer.is_none() {
                    sessions.enter();
                }
                peer = Some(partition as usize);
                match &coordinator {
                    Some(c) => match c.contribute(partition as usize, values) {
                        Ok(table) => Message::GatherReply { request_id, values: (*table).clone() },
                        Err(e) => Message::Error { request_id, code: ErrorCode::Aborted, vertex: 0, message: e.to_string() },
                    },
                    None => Message::Error {
                        request_id,
                        code: ErrorCode::Malformed,
                        vertex: 0,
                        message: "collectives are coordinated by partition 0".into(),
                    },
                }
                .encode()
            }
            _ => {
                let resp = serve_frame(&graph, &frame);
                counters.on_served(frame.len(), resp.len());
                resp
            }
        };
        if write_frame(&mut writer, &reply).is_err() {
            break;
        }
    }
    if let Some(p) = peer {
        if let Some(c) = &coordinator {
            c.depart(p);
        }
        sessions.leave();
    }
}

impl SocketEndpoint {
    /// Binds this partition's listener, then connects to every peer,
    /// retrying until `opts.connect_timeout` so processes may start in any
    /// order.
    pub fn start(
        config: &ClusterConfig,
        me: PartitionId,
        graph: Arc<PartitionedGraph>,
        opts: TransportOptions,
    ) -> Result<Self, TransportError> {
        let n = config.num_partitions();
        if me >= n || graph.my_partition() != me || graph.num_partitions() != n {
            return Err(TransportError::Config(format!(
                "partition {me} of {n} does not match graph partition {} of {}",
                graph.my_partition(),
                graph.num_partitions()
            )));
        }
        let (host, port) = config.address(me);
        let listener = TcpListener::bind((host, port))?;
        let mut local_addr = listener.local_addr()?;
        if local_addr.ip().is_unspecified() {
            local_addr.set_ip(IpAddr::V4(Ipv4Addr::LOCALHOST));
        }
        let counters: Arc<TrafficCounters> = Arc::default();
        let coordinator = (me == 0).then(|| Arc::new(GatherCoordinator::new(n, opts.timeout)));
        let shutdown = Arc::new(AtomicBool::new(false));
        let sessions = Arc::new(Sessions::default());

        let accept = {
            let (graph, counters, coordinator, shutdown, sessions) =
                (graph.clone(), counters.clone(), coordinator.clone(), shutdown.clone(), sessions.clone());
            std::thread::Builder::new().name(format!("accept-{me}")).spawn(move || {
                for conn in listener.incoming() {
                    if shutdown.load(Ordering::Acquire) {
                        break;
                    }
                    let Ok(conn) = conn else { continue };
                    let _ = conn.set_nodelay(true);
                    let (g, c, co, se) = (graph.clone(), counters.clone(), coordinator.clone(), sessions.clone());
                    let _ = std::thread::Builder::new().name("service".into()).spawn(move || service(conn, g, c, co, se));
                }
            })?
        };

        let deadline = Instant::now() + opts.connect_timeout;
        let mut pools = Vec::with_capacity(n);
        let mut all_streams = Vec::new();
        for p in 0..n {
            if p == me {
                pools.push(None);
                continue;
            }
            let (h, port) = config.address(p);
            let mut idle = Vec::new();
            for _ in 0..opts.max_outstanding.max(1) {
                let s = connect_retry(h, port, deadline, p)?;
                s.set_read_timeout(Some(opts.timeout))?;
                all_streams.push(s.try_clone()?);
                idle.push(s);
            }
            pools.push(Some(ConnPool { idle: Mutex::new(idle), cv: Condvar::new() }));
        }
        let control = if me == 0 {
            None
        } else {
            let (h, port) = config.address(0);
            let s = connect_retry(h, port, deadline, 0)?;
            s.set_read_timeout(Some(opts.timeout))?;
            all_streams.push(s.try_clone()?);
            Some(Mutex::new(s))
        };
        Ok(Self {
            me,
            n,
            graph,
            pools,
            all_streams,
            control,
            coordinator,
            counters,
            next_id: AtomicU64::new(1),
            shutdown,
            sessions,
            local_addr,
            accept: Some(accept),
            opts,
        })
    }

    fn io_err(&self, e: std::io::Error, partition: PartitionId) -> TransportError {
        match e.kind() {
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => TransportError::Timeout { partition },
            _ => TransportError::Disconnected { partition },
        }
    }

    fn round_trip(&self, stream: &mut TcpStream, frame: &[u8], partition: PartitionId) -> Result<Vec<u8>, TransportError> {
        write_frame(stream, frame).map_err(|e| self.io_err(e, partition))?;
        match read_frame(stream) {
            Ok(Some(f)) => Ok(f),
            Ok(None) => Err(TransportError::Disconnected { partition }),
            Err(e) => Err(self.io_err(e, partition)),
        }
    }
}

impl Transport for SocketEndpoint {
    fn my_partition(&self) -> PartitionId {
        self.me
    }

    fn num_partitions(&self) -> usize {
        self.n
    }

    fn fetch_batch(&self, target: PartitionId, vertices: &[VertexId]) -> Result<FetchResponse, TransportError> {
        if vertices.is_empty() {
            return Ok(FetchResponse::default());
        }
        let request_id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let frame = Message::FetchRequest { request_id, requester: self.me as u64, vertices: vertices.to_vec() }.encode();
        let pool = match self.pools.get(target) {
            Some(Some(p)) => p,
            Some(None) => {
                // own partition: answer locally without touching the network
                let resp = serve_frame(&self.graph, &frame);
                return check_response(target, request_id, vertices, Message::decode(&resp)?);
            }
            None => return Err(TransportError::Config(format!("no partition {target}"))),
        };
        let mut stream = pool.take(self.opts.timeout, target)?;
        self.counters.on_request_sent(frame.len());
        // a failed connection is not returned to the pool
        let resp = self.round_trip(&mut stream, &frame, target)?;
        pool.put(stream);
        let reply = Message::decode(&resp)?;
        let lists = match &reply {
            Message::FetchResponse { lists, .. } => lists.len(),
            _ => 0,
        };
        self.counters.on_response_received(resp.len(), lists);
        check_response(target, request_id, vertices, reply)
    }

    fn all_gather(&self, values: &[u64]) -> Result<Vec<Vec<u64>>, TransportError> {
        if let Some(c) = &self.coordinator {
            return Ok((*c.contribute(self.me, values.to_vec())?).clone());
        }
        let control = self.control.as_ref().expect("non-zero partitions hold a control connection");
        let mut stream = control.lock().unwrap();
        let request_id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let frame = Message::Gather { request_id, partition: self.me as u64, values: values.to_vec() }.encode();
        let resp = self.round_trip(&mut stream, &frame, 0)?;
        match Message::decode(&resp)? {
            Message::GatherReply { values, .. } if values.len() == self.n => Ok(values),
            Message::Error { message, .. } => Err(TransportError::Aborted(message)),
            other => Err(TransportError::Protocol(format!("unexpected gather reply {other:?}"))),
        }
    }

    fn counters(&self) -> TrafficSnapshot {
        self.counters.snapshot()
    }

    fn abort(&self, reason: &str) {
        if let Some(c) = &self.coordinator {
            c.poison(reason);
        }
        if let Some(c) = &self.control {
            if let Ok(s) = c.try_lock() {
                let _ = s.shutdown(Shutdown::Both);
            }
        }
    }
}

impl Drop for SocketEndpoint {
    fn drop(&mut self) {
        if self.coordinator.is_some() {
            // peers close their control connection once they hold the reply
            self.sessions.wait_closed(self.opts.timeout.min(LINGER));
        }
        self.shutdown.store(true, Ordering::Release);
        for s in &self.all_streams {
            let _ = s.shutdown(Shutdown::Both);
        }
        // wake the accept loop so it observes the flag
        let _ = TcpStream::connect_timeout(&self.local_addr, Duration::from_millis(500));
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CanonicalGraph;

    fn free_ports(n: usize) -> Vec<u16> {
        let ls: Vec<_> = (0..n).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
        ls.iter().map(|l| l.local_addr().unwrap().port()).collect()
    }

    #[test]
    fn parses_cluster_file() {
        let c: ClusterConfig = "# comment\n1 127.0.0.1 9001\n0 localhost 9000\n".parse().unwrap();
        assert_eq!(c.num_partitions(), 2);
        assert_eq!(c.address(0), ("localhost", 9000));
        assert!("0 a 1\n2 b 2\n".parse::<ClusterConfig>().is_err());
        assert!("0 a\n".parse::<ClusterConfig>().is_err());
        assert!("".parse::<ClusterConfig>().is_err());
    }

    #[test]
    fn two_endpoints_fetch_and_gather() {
        let g = CanonicalGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let parts: Vec<_> = g.partition(2).unwrap().into_iter().map(Arc::new).collect();
        let ports = free_ports(2);
        let cfg = ClusterConfig::new(ports.iter().map(|&p| ("127.0.0.1".to_string(), p)).collect()).unwrap();
        let opts = TransportOptions { timeout: Duration::from_secs(10), ..Default::default() };
        std::thread::scope(|s| {
            let hs: Vec<_> = (0..2)
                .map(|me| {
                    let (cfg, part, g) = (&cfg, parts[me].clone(), &g);
                    s.spawn(move || {
                        let ep = SocketEndpoint::start(cfg, me, part, opts).unwrap();
                        let other = 1 - me;
                        let vs: Vec<u32> = (0..6).filter(|v| *v as usize % 2 == other).collect();
                        let r = ep.fetch_batch(other, &vs).unwrap();
                        for (v, list) in &r.lists {
                            assert_eq!(&list[..], g.neighbors(*v));
                        }
                        assert!(matches!(ep.fetch_batch(other, &[me as u32]), Err(TransportError::NotOwned { .. })));
                        let t = ep.all_gather(&[me as u64 + 1]).unwrap();
                        assert_eq!(t, vec![vec![1], vec![2]]);
                        ep.barrier().unwrap();
                        ep.counters()
                    })
                })
                .collect();
            let c: Vec<TrafficSnapshot> = hs.into_iter().map(|h| h.join().unwrap()).collect();
            assert_eq!(c[0].request_bytes_sent, c[1].request_bytes_received);
            assert_eq!(c[1].response_bytes_sent, c[0].response_bytes_received);
        });
    }
}
