use super::{GraphError, Label, PartitionId, VertexId};

/// Vertex-to-partition hash `H(v) = v mod N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionMap {
    num_partitions: usize,
}

impl PartitionMap {
    pub fn new(num_partitions: usize) -> Self {
        assert!(num_partitions > 0, "at least one partition");
        Self { num_partitions }
    }

    pub fn num_partitions(&self) -> usize {
        self.num_partitions
    }

    #[inline]
    pub fn owner(&self, v: VertexId) -> PartitionId {
        v as usize % self.num_partitions
    }

    /// Position of `v` inside its owner's CSR arrays.
    #[inline]
    pub fn local_index(&self, v: VertexId) -> usize {
        v as usize / self.num_partitions
    }

    pub fn owned_vertices(
        &self,
        partition: PartitionId,
        num_vertices: usize,
    ) -> impl Iterator<Item = VertexId> {
        (partition..num_vertices)
            .step_by(self.num_partitions)
            .map(|v| v as VertexId)
    }
}

/// One worker's share of the input graph.
///
/// Holds the adjacency lists of the owned vertices `{v : H(v) = my_partition}`
/// in CSR form, plus the global degree array (and labels, when present)
/// replicated on every worker. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedGraph {
    map: PartitionMap,
    my_partition: PartitionId,
    degrees: Vec<u32>,
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    labels: Option<Vec<Label>>,
    oriented: bool,
}

impl PartitionedGraph {
    pub(crate) fn from_parts(
        map: PartitionMap,
        my_partition: PartitionId,
        degrees: Vec<u32>,
        offsets: Vec<usize>,
        neighbors: Vec<VertexId>,
        labels: Option<Vec<Label>>,
        oriented: bool,
    ) -> Self {
        debug_assert_eq!(
            offsets.len() - 1,
            map.owned_vertices(my_partition, degrees.len()).count()
        );
        Self {
            map,
            my_partition,
            degrees,
            offsets,
            neighbors,
            labels,
            oriented,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.degrees.len()
    }

    pub fn num_partitions(&self) -> usize {
        self.map.num_partitions()
    }

    pub fn my_partition(&self) -> PartitionId {
        self.my_partition
    }

    pub fn partition_map(&self) -> PartitionMap {
        self.map
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    #[inline]
    pub fn owner(&self, v: VertexId) -> PartitionId {
        self.map.owner(v)
    }

    #[inline]
    pub fn is_local(&self, v: VertexId) -> bool {
        self.map.owner(v) == self.my_partition
    }

    /// Global degree (length of the stored list) of any vertex.
    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.degrees[v as usize] as usize
    }

    pub fn label(&self, v: VertexId) -> Option<Label> {
        self.labels.as_ref().map(|l| l[v as usize])
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn owned_vertices(&self) -> impl Iterator<Item = VertexId> {
        self.map.owned_vertices(self.my_partition, self.num_vertices())
    }

    pub fn num_owned(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sorted neighbor list of an owned vertex, borrowed from the CSR arrays.
    pub fn local_edge_list(&self, v: VertexId) -> Result<&[VertexId], GraphError> {
        if (v as usize) >= self.num_vertices() || !self.is_local(v) {
            return Err(GraphError::NotOwned {
                vertex: v,
                owner: if (v as usize) < self.num_vertices() {
                    self.owner(v)
                } else {
                    usize::MAX
                },
                requested: self.my_partition,
            });
        }
        Ok(self.owned_list(v))
    }

    /// Unchecked variant for callers that already verified ownership.
    #[inline]
    pub(crate) fn owned_list(&self, v: VertexId) -> &[VertexId] {
        let i = self.map.local_index(v);
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Bytes of the whole (global) graph's CSR, computed from the replicated
    /// degree array.
    pub fn global_csr_bytes(&self) -> usize {
        let edges: usize = self.degrees.iter().map(|&d| d as usize).sum();
        (self.num_vertices() + 1) * std::mem::size_of::<u64>()
            + edges * std::mem::size_of::<VertexId>()
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn raw_parts(&self) -> (&[u32], &[usize], &[VertexId], Option<&[Label]>) {
        (&self.degrees, &self.offsets, &self.neighbors, self.labels.as_deref())
    }
}
