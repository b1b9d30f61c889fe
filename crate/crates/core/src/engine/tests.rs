use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{CanonicalGraph, VertexId};
use crate::run_in_process;

fn gnp(n: usize, p: f64, seed: u64) -> CanonicalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    CanonicalGraph::from_edges(n, &edges)
}

fn complete(n: usize) -> CanonicalGraph {
    let edges: Vec<_> = (0..n as VertexId).flat_map(|u| (u + 1..n as VertexId).map(move |v| (u, v))).collect();
    CanonicalGraph::from_edges(n, &edges)
}

// brute force over vertex subsets of size k
fn cliques(g: &CanonicalGraph, k: usize) -> u64 {
    let adj: Vec<HashSet<VertexId>> = (0..g.num_vertices() as VertexId).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    fn rec(adj: &[HashSet<VertexId>], chosen: &mut Vec<VertexId>, start: usize, k: usize) -> u64 {
        if chosen.len() == k {
            return 1;
        }
        let mut total = 0;
        for v in start..adj.len() {
            if chosen.iter().all(|&c| adj[c as usize].contains(&(v as VertexId))) {
                chosen.push(v as VertexId);
                total += rec(adj, chosen, v + 1, k);
                chosen.pop();
            }
        }
        total
    }
    rec(&adj, &mut Vec::new(), 0, k)
}

fn cfg(chunk_bytes: usize, threads: usize) -> EngineConfig {
    EngineConfig { chunk_bytes, compute_threads: threads, comm_threads: 1, ..EngineConfig::default() }
}

fn check_invariants(outs: &[RunOutput], k: usize, chunk_bytes: usize) {
    for o in outs {
        let m = &o.metrics;
        assert!(m.lifecycle_consistent(), "{m:?}");
        assert!(m.peak_live_chunks as usize <= k, "{} chunks", m.peak_live_chunks);
        assert!(m.peak_arena_bytes as usize <= k * chunk_bytes);
    }
}

#[test]
fn triangles_on_k4_with_two_workers() {
    let outs = run_in_process(&complete(4), 2, &PatternApp::triangle_count(), &cfg(1 << 20, 1)).unwrap();
    assert!(outs.iter().all(|o| o.count("triangle") == Some(4)));
    assert_eq!(outs.iter().map(|o| o.local_counts[0]).sum::<u64>(), 4);
    check_invariants(&outs, 3, 1 << 20);
}

#[test]
fn bipartite_has_no_triangles() {
    let edges: Vec<_> = (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect();
    let g = CanonicalGraph::from_edges(6, &edges);
    for n in [1, 2, 3] {
        let outs = run_in_process(&g, n, &PatternApp::triangle_count(), &cfg(1 << 20, 2)).unwrap();
        assert_eq!(outs[0].count("triangle"), Some(0));
    }
}

#[test]
fn four_cliques_match_brute_force_for_any_worker_count() {
    let g = gnp(48, 0.4, 7);
    let expect = cliques(&g, 4);
    let app = PatternApp::clique_count(4).unwrap();
    for n in [1, 2, 4] {
        let outs = run_in_process(&g, n, &app, &cfg(64 << 10, 2)).unwrap();
        assert_eq!(outs[0].count("4-clique"), Some(expect), "{n} workers");
        check_invariants(&outs, 4, 64 << 10);
    }
}

#[test]
fn tiny_chunks_force_backtracking_but_keep_the_count() {
    let app = PatternApp::clique_count(4).unwrap();
    let small = cfg(super::chunk::RECORD_BYTES * 2, 1);
    let outs = run_in_process(&complete(6), 2, &app, &small).unwrap();
    assert_eq!(outs[0].count("4-clique"), Some(15));
    check_invariants(&outs, 4, small.chunk_bytes);
    assert!(outs.iter().map(|o| o.metrics.chunks_sealed.iter().sum::<u64>()).sum::<u64>() > 10);
}

#[test]
fn path_graph_triangle_run_uses_two_chunks() {
    let edges: Vec<_> = (0..9).map(|v| (v, v + 1)).collect();
    let g = CanonicalGraph::from_edges(10, &edges);
    let outs = run_in_process(&g, 1, &PatternApp::triangle_count(), &cfg(1 << 20, 1)).unwrap();
    assert_eq!(outs[0].count("triangle"), Some(0));
    assert_eq!(outs[0].metrics.peak_live_chunks, 2);
}

#[test]
fn five_clique_peak_chunks_bounded() {
    let g = gnp(64, 0.3, 7);
    let app = PatternApp::clique_count(5).unwrap();
    let c = cfg(16 << 10, 2);
    let outs = run_in_process(&g, 2, &app, &c).unwrap();
    assert_eq!(outs[0].count("5-clique"), Some(cliques(&g, 5)));
    check_invariants(&outs, 5, c.chunk_bytes);
}

#[test]
fn lifecycle_audit_on_random_graph() {
    let g = gnp(32, 0.3, 11);
    let outs = run_in_process(&g, 2, &PatternApp::motif_count(4).unwrap(), &cfg(8 << 10, 3)).unwrap();
    for o in &outs {
        assert!(o.metrics.embeddings_created > 0);
        assert!(o.metrics.lifecycle_consistent());
    }
}

#[test]
fn single_worker_sends_nothing() {
    let outs = run_in_process(&gnp(32, 0.3, 1), 1, &PatternApp::triangle_count(), &cfg(1 << 20, 1)).unwrap();
    assert_eq!(outs[0].metrics.requests_sent, 0);
    assert_eq!(outs[0].metrics.bytes_sent, 0);
}

#[test]
fn one_request_per_remote_batch() {
    // dedup on and big chunks: every level-1 chunk has exactly one remote
    // batch, fetched in a single message
    let g = gnp(48, 0.3, 3);
    let mut c = cfg(1 << 20, 1);
    c.sharing.cache = false;
    let outs = run_in_process(&g, 2, &PatternApp::clique_count(4).unwrap(), &c).unwrap();
    for o in &outs {
        let m = &o.metrics;
        assert_eq!(m.dedup_dropped, 0);
        assert_eq!(m.dedup_bytes_saved > 0, m.dedup_shared > 0);
        assert_eq!(m.cache_bytes_saved, 0);
        let remote_chunks: u64 = m.chunks_sealed.iter().skip(1).sum();
        assert_eq!(m.requests_sent, remote_chunks, "{m:?}");
        assert!(m.fetches_per_vertex.values().all(|&c| c <= remote_chunks));
    }
}

#[test]
fn counts_do_not_depend_on_threads_or_chunk_size() {
    let g = gnp(40, 0.35, 5);
    let app = PatternApp::motif_count(4).unwrap();
    let base = run_in_process(&g, 1, &app, &cfg(1 << 20, 1)).unwrap()[0].counts.clone();
    for (n, threads, bytes) in [(2, 4, 4 << 10), (4, 2, 64 << 10), (3, 1, 2 << 10)] {
        let outs = run_in_process(&g, n, &app, &cfg(bytes, threads)).unwrap();
        assert_eq!(outs[0].counts, base, "{n} workers {threads} threads {bytes} bytes");
        check_invariants(&outs, 4, bytes);
    }
}

#[test]
fn sharing_switches_do_not_change_counts() {
    let g = gnp(36, 0.35, 9);
    let app = PatternApp::clique_count(4).unwrap();
    let expect = cliques(&g, 4);
    for sharing in SharingOptions::all_combinations() {
        let c = EngineConfig { sharing, cache_degree_threshold: 4, ..cfg(16 << 10, 2) };
        let outs = run_in_process(&g, 2, &app, &c).unwrap();
        assert_eq!(outs[0].count("4-clique"), Some(expect), "{sharing:?}");
    }
}

#[test]
fn computation_reuse_saves_intersections_on_k8() {
    let app = PatternApp::clique_count(5).unwrap();
    let with = run_in_process(&complete(8), 1, &app, &cfg(1 << 20, 1)).unwrap().remove(0);
    let mut c = cfg(1 << 20, 1);
    c.sharing.computation_reuse = false;
    let without = run_in_process(&complete(8), 1, &app, &c).unwrap().remove(0);
    assert_eq!(with.count("5-clique"), Some(56));
    assert_eq!(without.count("5-clique"), Some(56));
    // an embedding with i+1 vertices intersects i lists from scratch, or
    // one list with its parent's stored result: C(8,3) triangles save one
    // intersection each, C(8,4) 4-cliques save two
    assert_eq!(without.metrics.intersections - with.metrics.intersections, 56 + 2 * 70);
}

#[test]
fn undersized_chunk_is_reported() {
    let outs = run_in_process(&complete(5), 1, &PatternApp::triangle_count(), &cfg(8, 1));
    match outs {
        Err(EngineError::ChunkTooSmall { required, configured: 8 }) => assert!(required > 8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn labeled_plan_needs_labels() {
    use crate::plan::{clique_plan, Pattern};
    let plan = clique_plan(3).unwrap().with_labels(vec![0, 0, 0]).unwrap();
    let pat = Pattern::clique(3).with_labels(vec![0, 0, 0]).unwrap();
    let app = PatternApp::custom(vec![(pat, plan)]);
    assert!(matches!(run_in_process(&complete(4), 1, &app, &cfg(1 << 20, 1)), Err(EngineError::Config(_))));
    let labeled = complete(4).with_dense_labels(vec![0, 0, 0, 1]).unwrap();
    assert_eq!(run_in_process(&labeled, 2, &app, &cfg(1 << 20, 1)).unwrap()[0].counts[0].1, 1);
}
