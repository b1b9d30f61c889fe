use std::collections::HashMap;
use std::io::Write;

use super::{GraphError, Label, PartitionMap, PartitionedGraph, VertexId};

/// Whole-graph CSR with dense ids, sorted duplicate-free adjacency lists and
/// no self-loops.
///
/// Before orientation the graph is symmetric. After [`orient`](Self::orient)
/// every undirected edge is stored exactly once, as an out-edge of its
/// lower-ranked endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    original_ids: Vec<u64>,
    labels: Option<Vec<Label>>,
    oriented: bool,
}

/// Canonicalizes a raw edge multiset: drops self-loops and duplicates,
/// materializes both directions and remaps ids densely in order of first
/// appearance.
pub fn preprocess(raw: &[(u64, u64)]) -> CanonicalGraph {
    let mut remap: HashMap<u64, VertexId> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut dense = |id: u64| -> VertexId {
        *remap.entry(id).or_insert_with(|| {
            original_ids.push(id);
            (original_ids.len() - 1) as VertexId
        })
    };
    let mut edges = Vec::with_capacity(raw.len());
    for &(u, v) in raw {
        let (du, dv) = (dense(u), dense(v));
        edges.push((du, dv));
    }
    let n = original_ids.len();
    let mut g = CanonicalGraph::from_edges(n, &edges);
    g.original_ids = original_ids;
    g
}

impl CanonicalGraph {
    /// Builds a symmetric graph over `num_vertices` dense ids. Vertices that
    /// appear in no edge are kept as isolated vertices.
    pub fn from_edges(num_vertices: usize, edges: &[(VertexId, VertexId)]) -> Self {
        let mut degree = vec![0usize; num_vertices];
        for &(u, v) in edges {
            if u != v {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(num_vertices + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0; *offsets.last().unwrap()];
        for &(u, v) in edges {
            if u != v {
                neighbors[fill[u as usize]] = v;
                fill[u as usize] += 1;
                neighbors[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
        }
        Self::compact(num_vertices, offsets, neighbors, false)
    }

    /// Sorts and deduplicates each list, rebuilding offsets.
    fn compact(
        num_vertices: usize,
        offsets: Vec<usize>,
        mut neighbors: Vec<VertexId>,
        oriented: bool,
    ) -> Self {
        let mut new_offsets = Vec::with_capacity(num_vertices + 1);
        new_offsets.push(0);
        let mut write = 0;
        for v in 0..num_vertices {
            let (s, e) = (offsets[v], offsets[v + 1]);
            neighbors[s..e].sort_unstable();
            let mut last = None;
            for i in s..e {
                let x = neighbors[i];
                if last != Some(x) {
                    neighbors[write] = x;
                    write += 1;
                    last = Some(x);
                }
            }
            new_offsets.push(write);
        }
        neighbors.truncate(write);
        Self {
            offsets: new_offsets,
            neighbors,
            original_ids: (0..num_vertices as u64).collect(),
            labels: None,
            oriented,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        if self.oriented {
            self.neighbors.len()
        } else {
            self.neighbors.len() / 2
        }
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn original_id(&self, v: VertexId) -> u64 {
        self.original_ids[v as usize]
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Attaches labels keyed by original vertex id. Every vertex must have one.
    pub fn with_labels(mut self, by_original: &HashMap<u64, Label>) -> Result<Self, GraphError> {
        let labels = self
            .original_ids
            .iter()
            .map(|id| by_original.get(id).copied().ok_or(GraphError::MissingLabel(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches labels indexed by dense id.
    pub fn with_dense_labels(mut self, labels: Vec<Label>) -> Result<Self, GraphError> {
        if labels.len() != self.num_vertices() {
            return Err(GraphError::Config(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.num_vertices()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Undirected edges `(u, v)` with `u < v`, or the directed edges of an
    /// oriented graph.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let oriented = self.oriented;
        (0..self.num_vertices() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| oriented || u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Orients every edge from the endpoint with the smaller `(degree, id)`
    /// to the larger one, producing a DAG.
    pub fn orient(&self) -> CanonicalGraph {
        assert!(!self.oriented, "graph is already oriented");
        let rank = |v: VertexId| (self.degree(v), v);
        let n = self.num_vertices();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(self.neighbors.len() / 2);
        for u in 0..n as VertexId {
            let ru = rank(u);
            neighbors.extend(self.neighbors(u).iter().copied().filter(|&v| ru < rank(v)));
            offsets.push(neighbors.len());
        }
        CanonicalGraph {
            offsets,
            neighbors,
            original_ids: self.original_ids.clone(),
            labels: self.labels.clone(),
            oriented: true,
        }
    }

    /// Writes the graph as an edge list using dense ids.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()
    }

    /// Bytes of the full CSR representation, the reference size for cache
    /// capacity.
    pub fn csr_bytes(&self) -> usize {
        self.offsets.len() * std::mem::size_of::<u64>()
            + self.neighbors.len() * std::mem::size_of::<VertexId>()
    }

    /// Splits the graph into `n` partitions with `H(v) = v mod n`.
    pub fn partition(&self, n: usize) -> Result<Vec<PartitionedGraph>, GraphError> {
        if n == 0 {
            return Err(GraphError::Config("number of partitions must be at least 1".into()));
        }
        let map = PartitionMap::new(n);
        let degrees: Vec<u32> = (0..self.num_vertices() as VertexId)
            .map(|v| self.degree(v) as u32)
            .collect();
        let parts = (0..n)
            .map(|p| {
                let mut offsets = vec![0usize];
                let mut neighbors = Vec::new();
                for v in map.owned_vertices(p, self.num_vertices()) {
                    neighbors.extend_from_slice(self.neighbors(v));
                    offsets.push(neighbors.len());
                }
                PartitionedGraph::from_parts(
                    map,
                    p,
                    degrees.clone(),
                    offsets,
                    neighbors,
                    self.labels.clone(),
                    self.oriented,
                )
            })
            .collect();
        Ok(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u64) -> Vec<(u64, u64)> {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        e
    }

    #[test]
    fn drops_self_loops() {
        let g = preprocess(&[(0, 0), (0, 1)]);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn merges_reverse_duplicates() {
        let g = preprocess(&[(0, 1), (1, 0)]);
        assert_eq!(g.num_edges(), 1);
        assert_eq!((g.degree(0), g.degree(1)), (1, 1));
    }

    #[test]
    fn complete_graph_degrees() {
        let g = preprocess(&k(4));
        assert_eq!(g.num_edges(), 6);
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn remaps_in_first_appearance_order() {
        let g = preprocess(&[(10, 5), (5, 7)]);
        assert_eq!(g.original_id(0), 10);
        assert_eq!(g.original_id(1), 5);
        assert_eq!(g.original_id(2), 7);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn empty_graph() {
        let g = preprocess(&[]);
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn orient_complete_graph() {
        let g = preprocess(&k(4)).orient();
        let out: Vec<usize> = (0..4).map(|v| g.degree(v)).collect();
        assert_eq!(out, vec![3, 2, 1, 0]);
        assert_eq!(g.neighbors(1), &[2, 3]);
        assert_eq!(g.num_edges(), 6);
    }

    #[test]
    fn orient_star_points_to_center() {
        let g = preprocess(&[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).orient();
        assert_eq!(g.degree(0), 0);
        for leaf in 1..=5 {
            assert_eq!(g.neighbors(leaf), &[0]);
        }
    }

    #[test]
    fn labels_by_original_id() {
        let g = preprocess(&[(7, 9)]);
        let labels: HashMap<u64, Label> = [(7, 1), (9, 2)].into_iter().collect();
        let g = g.with_labels(&labels).unwrap();
        assert_eq!(g.labels(), Some(&[1, 2][..]));
        let missing: HashMap<u64, Label> = [(7, 1)].into_iter().collect();
        assert!(matches!(
            preprocess(&[(7, 9)]).with_labels(&missing),
            Err(GraphError::MissingLabel(9))
        ));
    }

    #[test]
    fn partition_zero_is_config_error() {
        assert!(matches!(preprocess(&k(3)).partition(0), Err(GraphError::Config(_))));
    }
}
