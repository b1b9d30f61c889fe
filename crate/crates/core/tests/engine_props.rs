use std::collections::HashSet;

use gpm_core::engine::EngineConfig;
use gpm_core::graph::{CanonicalGraph, VertexId};
use gpm_core::plan::PatternApp;
use gpm_core::run_in_process;
use gpm_core::sharing::SharingOptions;
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = CanonicalGraph> {
    (4usize..20).prop_flat_map(|n| {
        prop::collection::vec((0..n as VertexId, 0..n as VertexId), 0..n * 3)
            .prop_map(move |e| CanonicalGraph::from_edges(n, &e))
    })
}

fn adjacency(g: &CanonicalGraph) -> Vec<HashSet<VertexId>> {
    (0..g.num_vertices() as VertexId).map(|v| g.neighbors(v).iter().copied().collect()).collect()
}

fn triangles(g: &CanonicalGraph) -> u64 {
    let adj = adjacency(g);
    let n = adj.len() as VertexId;
    let mut c = 0;
    for a in 0..n {
        for b in a + 1..n {
            for d in b + 1..n {
                if adj[a as usize].contains(&b) && adj[a as usize].contains(&d) && adj[b as usize].contains(&d) {
                    c += 1;
                }
            }
        }
    }
    c
}

// (triangles, induced wedges) over all 3-subsets
fn three_motifs(g: &CanonicalGraph) -> (u64, u64) {
    let adj = adjacency(g);
    let n = adj.len() as VertexId;
    let (mut t, mut w) = (0, 0);
    for a in 0..n {
        for b in a + 1..n {
            for d in b + 1..n {
                let e = [(a, b), (a, d), (b, d)].iter().filter(|(x, y)| adj[*x as usize].contains(y)).count();
                match e {
                    3 => t += 1,
                    2 => w += 1,
                    _ => {}
                }
            }
        }
    }
    (t, w)
}

fn cfg(chunk_bytes: usize, threads: usize, sharing: SharingOptions) -> EngineConfig {
    EngineConfig { chunk_bytes, compute_threads: threads, comm_threads: 1, cache_degree_threshold: 2, sharing, ..EngineConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_count_is_invariant(
        g in graph(),
        n in 1usize..5,
        threads in 1usize..4,
        chunk in prop::sample::select(vec![512usize, 4096, 1 << 20]),
        flags in 0usize..16,
    ) {
        let sharing = SharingOptions::all_combinations().nth(flags).unwrap();
        let outs = run_in_process(&g, n, &PatternApp::triangle_count(), &cfg(chunk, threads, sharing)).unwrap();
        let expect = triangles(&g);
        for o in &outs {
            prop_assert_eq!(o.count("triangle"), Some(expect));
            prop_assert!(o.metrics.lifecycle_consistent());
            prop_assert!(o.metrics.peak_live_chunks <= 3);
            prop_assert!(o.metrics.peak_arena_bytes as usize <= 3 * chunk);
        }
        prop_assert_eq!(outs.iter().map(|o| o.local_counts[0]).sum::<u64>(), expect);
    }

    #[test]
    fn three_motifs_match_subset_enumeration(g in graph(), n in 1usize..4) {
        let outs = run_in_process(&g, n, &PatternApp::motif_count(3).unwrap(), &cfg(4096, 2, SharingOptions::default())).unwrap();
        let (t, w) = three_motifs(&g);
        prop_assert_eq!(outs[0].count("triangle"), Some(t));
        prop_assert_eq!(outs[0].count("wedge"), Some(w));
    }

    #[test]
    fn oriented_triangles_match(g in graph(), n in 1usize..4) {
        let app = PatternApp::triangle_count().for_oriented_graph().unwrap();
        let outs = run_in_process(&g.orient(), n, &app, &cfg(4096, 1, SharingOptions::default())).unwrap();
        prop_assert_eq!(outs[0].count("triangle"), Some(triangles(&g)));
    }

    #[test]
    fn traffic_is_conserved(g in graph(), n in 2usize..5) {
        let outs = run_in_process(&g, n, &PatternApp::clique_count(4).unwrap(), &cfg(2048, 2, SharingOptions::default())).unwrap();
        let sent: u64 = outs.iter().map(|o| o.metrics.request_bytes_sent).sum();
        let got: u64 = outs.iter().map(|o| o.metrics.request_bytes_received).sum();
        prop_assert_eq!(sent, got);
        let sent: u64 = outs.iter().map(|o| o.metrics.response_bytes_sent).sum();
        let got: u64 = outs.iter().map(|o| o.metrics.response_bytes_received).sum();
        prop_assert_eq!(sent, got);
        for o in &outs {
            prop_assert_eq!(o.metrics.fetch_count, o.metrics.fetches_per_vertex.values().sum::<u64>());
        }
    }
}
