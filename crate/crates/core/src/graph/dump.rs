//! Binary partition dump.
//!
//! Layout, all integers little-endian `u64` unless noted:
//!
//! ```text
//! magic[8] = "GPMPART\0"
//! version: u32
//! num_partitions: u32
//! partition_id: u32
//! flags: u32            bit0 = oriented, bit1 = labels present
//! num_vertices
//! num_owned
//! num_neighbors
//! degrees[num_vertices]
//! offsets[num_owned + 1]
//! neighbors[num_neighbors]
//! labels[num_vertices]  (only when bit1 is set)
//! ```

use std::io::{Read, Write};

use super::{GraphError, PartitionMap, PartitionedGraph};

pub const DUMP_MAGIC: &[u8; 8] = b"GPMPART\0";
pub const DUMP_VERSION: u32 = 1;

const FLAG_ORIENTED: u32 = 1;
const FLAG_LABELS: u32 = 2;

pub fn write_partition<W: Write>(g: &PartitionedGraph, mut w: W) -> std::io::Result<()> {
    let (degrees, offsets, neighbors, labels) = g.raw_parts();
    let mut flags = 0;
    if g.is_oriented() {
        flags |= FLAG_ORIENTED;
    }
    if labels.is_some() {
        flags |= FLAG_LABELS;
    }
    w.write_all(DUMP_MAGIC)?;
    for x in [DUMP_VERSION, g.num_partitions() as u32, g.my_partition() as u32, flags] {
        w.write_all(&x.to_le_bytes())?;
    }
    for x in [degrees.len(), offsets.len() - 1, neighbors.len()] {
        w.write_all(&(x as u64).to_le_bytes())?;
    }
    for &d in degrees {
        w.write_all(&u64::from(d).to_le_bytes())?;
    }
    for &o in offsets {
        w.write_all(&(o as u64).to_le_bytes())?;
    }
    for &v in neighbors {
        w.write_all(&u64::from(v).to_le_bytes())?;
    }
    if let Some(labels) = labels {
        for &l in labels {
            w.write_all(&u64::from(l).to_le_bytes())?;
        }
    }
    w.flush()
}

fn u32_at<R: Read>(r: &mut R) -> Result<u32, GraphError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn u64_at<R: Read>(r: &mut R) -> Result<u64, GraphError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn narrow<T: TryFrom<u64>>(x: u64, what: &str) -> Result<T, GraphError> {
    T::try_from(x).map_err(|_| GraphError::Corrupt(format!("{what} {x} out of range")))
}

fn vec_of<R: Read, T: TryFrom<u64>>(r: &mut R, n: usize, what: &str) -> Result<Vec<T>, GraphError> {
    (0..n).map(|_| narrow(u64_at(r)?, what)).collect()
}

pub fn read_partition<R: Read>(mut r: R) -> Result<PartitionedGraph, GraphError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(GraphError::Corrupt("bad magic".into()));
    }
    let version = u32_at(&mut r)?;
    if version != DUMP_VERSION {
        return Err(GraphError::Corrupt(format!("unsupported version {version}")));
    }
    let n = u32_at(&mut r)? as usize;
    let me = u32_at(&mut r)? as usize;
    let flags = u32_at(&mut r)?;
    if n == 0 || me >= n {
        return Err(GraphError::Corrupt(format!("partition {me} of {n}")));
    }
    let num_vertices: usize = narrow(u64_at(&mut r)?, "vertex count")?;
    let num_owned: usize = narrow(u64_at(&mut r)?, "owned count")?;
    let num_neighbors: usize = narrow(u64_at(&mut r)?, "neighbor count")?;
    let map = PartitionMap::new(n);
    if map.owned_vertices(me, num_vertices).count() != num_owned {
        return Err(GraphError::Corrupt("owned count does not match partition map".into()));
    }
    let degrees: Vec<u32> = vec_of(&mut r, num_vertices, "degree")?;
    let offsets: Vec<usize> = vec_of(&mut r, num_owned + 1, "offset")?;
    if offsets.first() != Some(&0)
        || offsets.last() != Some(&num_neighbors)
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(GraphError::Corrupt("offsets are not monotone".into()));
    }
    let neighbors = vec_of(&mut r, num_neighbors, "neighbor")?;
    let labels = if flags & FLAG_LABELS != 0 {
        Some(vec_of(&mut r, num_vertices, "label")?)
    } else {
        None
    };
    Ok(PartitionedGraph::from_parts(
        map,
        me,
        degrees,
        offsets,
        neighbors,
        labels,
        flags & FLAG_ORIENTED != 0,
    ))
}
