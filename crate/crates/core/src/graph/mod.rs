//! Input graph: ingestion, canonicalization, orientation and 1-D partitioning.
//!
//! The pipeline is `load_edge_list` -> [`preprocess`] -> optional
//! [`CanonicalGraph::orient`] -> [`CanonicalGraph::partition`]. Every worker
//! receives one [`PartitionedGraph`] holding the adjacency lists of the
//! vertices it owns plus the replicated global degree array.

mod canonical;
mod dump;
mod io;
mod partition;

pub use canonical::{preprocess, CanonicalGraph};
pub use dump::{read_partition, write_partition, DUMP_MAGIC, DUMP_VERSION};
pub use io::{load_edge_list, load_labels};
pub use partition::{PartitionMap, PartitionedGraph};

use thiserror::Error;

/// Dense vertex identifier in `[0, |V|)`.
pub type VertexId = u32;

/// Worker / partition index in `[0, N)`.
pub type PartitionId = usize;

/// Vertex label id.
pub type Label = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("input contains no edges")]
    Empty,
    #[error("vertex {vertex} is owned by partition {owner}, not {requested}")]
    NotOwned {
        vertex: VertexId,
        owner: PartitionId,
        requested: PartitionId,
    },
    #[error("vertex {0} has no label")]
    MissingLabel(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corrupt partition dump: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
