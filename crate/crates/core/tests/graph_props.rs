use std::collections::{BTreeSet, HashSet};

use gpm_core::graph::{preprocess, read_partition, write_partition, CanonicalGraph, VertexId};
use proptest::prelude::*;

fn raw_edges() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((0u64..40, 0u64..40), 0..150)
}

proptest! {
    #[test]
    fn canonical_lists_are_sorted_symmetric_and_loop_free(raw in raw_edges()) {
        let g = preprocess(&raw);
        let mut expect = BTreeSet::new();
        for &(u, v) in &raw {
            if u != v {
                expect.insert((u.min(v), u.max(v)));
            }
        }
        prop_assert_eq!(g.num_edges(), expect.len());
        for v in 0..g.num_vertices() as VertexId {
            let n = g.neighbors(v);
            prop_assert!(n.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!n.contains(&v));
            for &u in n {
                prop_assert!(g.neighbors(u).binary_search(&v).is_ok());
                let (a, b) = (g.original_id(u), g.original_id(v));
                prop_assert!(expect.contains(&(a.min(b), a.max(b))));
            }
        }
    }

    #[test]
    fn partitions_cover_every_list_exactly_once(raw in raw_edges(), n in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let g = preprocess(&raw);
        let parts = g.partition(n).unwrap();
        let mut seen = HashSet::new();
        for (p, part) in parts.iter().enumerate() {
            for v in part.owned_vertices() {
                prop_assert_eq!(v as usize % n, p);
                prop_assert!(seen.insert(v));
                prop_assert_eq!(part.local_edge_list(v).unwrap(), g.neighbors(v));
            }
            for v in 0..g.num_vertices() as VertexId {
                prop_assert_eq!(part.degree(v), g.degree(v));
                prop_assert_eq!(part.local_edge_list(v).is_ok(), part.owner(v) == p);
            }
        }
        prop_assert_eq!(seen.len(), g.num_vertices());
    }

    #[test]
    fn orientation_is_acyclic_and_keeps_every_edge_once(raw in raw_edges()) {
        let g = preprocess(&raw);
        let o = g.orient();
        prop_assert_eq!(o.num_edges(), g.num_edges());
        let mut undirected = BTreeSet::new();
        for u in 0..o.num_vertices() as VertexId {
            for &v in o.neighbors(u) {
                // rank strictly increases along every edge, so no cycle exists
                prop_assert!((g.degree(u), u) < (g.degree(v), v));
                prop_assert!(undirected.insert((u.min(v), u.max(v))));
            }
        }
    }

    #[test]
    fn partition_dump_round_trips(raw in raw_edges(), n in 1usize..4) {
        let g = preprocess(&raw);
        for part in g.partition(n).unwrap() {
            let mut buf = Vec::new();
            write_partition(&part, &mut buf).unwrap();
            prop_assert_eq!(read_partition(&buf[..]).unwrap(), part);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ids are reassigned on reload, so compare through original ids
    #[test]
    fn text_round_trip_preserves_the_graph(raw in prop::collection::vec((0u64..256, 0u64..256), 1..600)) {
        let g = preprocess(&raw);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = preprocess(&gpm_core::graph::load_edge_list(&buf[..]).unwrap());
        prop_assert_eq!(back.num_vertices(), (0..g.num_vertices() as VertexId).filter(|&v| g.degree(v) > 0).count());
        prop_assert_eq!(back.num_edges(), g.num_edges());
        for v in 0..back.num_vertices() as VertexId {
            let orig = back.original_id(v) as VertexId;
            let mapped: BTreeSet<VertexId> = back.neighbors(v).iter().map(|&u| back.original_id(u) as VertexId).collect();
            prop_assert_eq!(mapped, g.neighbors(orig).iter().copied().collect::<BTreeSet<_>>());
        }
    }
}

#[test]
fn edge_list_file_round_trip() {
    let g = CanonicalGraph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let raw = gpm_core::graph::load_edge_list(&buf[..]).unwrap();
    let back = preprocess(&raw);
    assert_eq!(back.num_edges(), 4);
    let mut deg: Vec<usize> = (0..5).map(|v| back.degree(v)).collect();
    deg.sort_unstable();
    assert_eq!(deg, vec![1, 1, 2, 2, 2]);
}
