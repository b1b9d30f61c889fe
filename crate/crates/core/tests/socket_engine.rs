use std::net::TcpListener;
use std::sync::Arc;

use gpm_core::engine::{run, EngineConfig};
use gpm_core::graph::CanonicalGraph;
use gpm_core::plan::PatternApp;
use gpm_core::run_in_process;
use gpm_core::transport::{ClusterConfig, SocketEndpoint, Transport, TransportOptions};

fn free_ports(n: usize) -> Vec<u16> {
    let ls: Vec<_> = (0..n).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
    ls.iter().map(|l| l.local_addr().unwrap().port()).collect()
}

#[test]
fn tcp_backend_matches_in_process() {
    let n = 3;
    let edges: Vec<_> = (0..30u32).flat_map(|u| (u + 1..30).filter(move |v| (u * 7 + v * 3) % 5 < 2).map(move |v| (u, v))).collect();
    let g = CanonicalGraph::from_edges(30, &edges);
    let app = PatternApp::clique_count(4).unwrap();
    let cfg = EngineConfig { chunk_bytes: 8 << 10, compute_threads: 1, comm_threads: 1, ..EngineConfig::default() };
    let reference = run_in_process(&g, n, &app, &cfg).unwrap();

    let text: String = free_ports(n).iter().enumerate().map(|(i, p)| format!("{i} 127.0.0.1 {p}\n")).collect();
    let cluster: ClusterConfig = text.parse().unwrap();
    let parts = g.partition(n).unwrap();
    let outs: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .into_iter()
            .enumerate()
            .map(|(i, part)| {
                let (cluster, app, cfg) = (&cluster, &app, &cfg);
                s.spawn(move || {
                    let part = Arc::new(part);
                    let ep = SocketEndpoint::start(cluster, i, part.clone(), TransportOptions::default()).unwrap();
                    let ep: Arc<dyn Transport> = Arc::new(ep);
                    run(part, ep, app, cfg).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (a, b) in outs.iter().zip(&reference) {
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.local_counts, b.local_counts);
        assert_eq!(a.metrics.fetches_per_vertex, b.metrics.fetches_per_vertex);
        assert_eq!(a.metrics.requests_sent, b.metrics.requests_sent);
    }
}
