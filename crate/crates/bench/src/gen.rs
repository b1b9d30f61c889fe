//! Deterministic synthetic graphs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use gpm_core::graph::{CanonicalGraph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 7;

/// R-MAT quadrant probabilities (a, b, c; d is the remainder).
pub const RMAT_PROBS: (f64, f64, f64) = (0.57, 0.19, 0.19);
pub const RMAT_EDGE_FACTOR: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Complete { n: usize },
    /// Center 0 and leaves `1..=leaves`.
    Star { leaves: usize },
    Path { n: usize },
    Cycle { n: usize },
    ErdosRenyi { n: usize, p: f64 },
    Rmat { scale: u32, edge_factor: usize },
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid graph spec {spec:?}: {reason}")]
pub struct SpecError {
    spec: String,
    reason: String,
}

impl FromStr for GraphSpec {
    type Err = SpecError;

    /// `complete:N`, `star:LEAVES`, `path:N`, `cycle:N`, `er:N:P`,
    /// `rmat:SCALE[:EDGE_FACTOR]`.
    fn from_str(s: &str) -> Result<Self, SpecError> {
        let err = |reason: &str| SpecError { spec: s.to_string(), reason: reason.to_string() };
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize, SpecError> {
            parts.get(i).ok_or_else(|| err("missing parameter"))?.parse().map_err(|_| err("bad integer"))
        };
        let spec = match (parts[0], parts.len()) {
            ("complete", 2) => GraphSpec::Complete { n: num(1)? },
            ("star", 2) => GraphSpec::Star { leaves: num(1)? },
            ("path", 2) => GraphSpec::Path { n: num(1)? },
            ("cycle", 2) => GraphSpec::Cycle { n: num(1)? },
            ("er", 3) => {
                let p: f64 = parts[2].parse().map_err(|_| err("bad probability"))?;
                GraphSpec::ErdosRenyi { n: num(1)?, p }
            }
            ("rmat", 2) => GraphSpec::Rmat { scale: num(1)? as u32, edge_factor: RMAT_EDGE_FACTOR },
            ("rmat", 3) => GraphSpec::Rmat { scale: num(1)? as u32, edge_factor: num(2)? },
            _ => return Err(err("expected complete:N, star:N, path:N, cycle:N, er:N:P or rmat:SCALE[:EF]")),
        };
        spec.validate().map_err(|r| err(&r))?;
        Ok(spec)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete { n } => write!(f, "complete:{n}"),
            GraphSpec::Star { leaves } => write!(f, "star:{leaves}"),
            GraphSpec::Path { n } => write!(f, "path:{n}"),
            GraphSpec::Cycle { n } => write!(f, "cycle:{n}"),
            GraphSpec::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
            GraphSpec::Rmat { scale, edge_factor } => write!(f, "rmat:{scale}:{edge_factor}"),
        }
    }
}

impl GraphSpec {
    fn validate(&self) -> Result<(), String> {
        match *self {
            GraphSpec::Cycle { n } if n < 3 => Err("a cycle needs at least 3 vertices".into()),
            GraphSpec::ErdosRenyi { p, .. } if !(0.0..=1.0).contains(&p) => Err("p must lie in [0, 1]".into()),
            GraphSpec::Rmat { scale, .. } if !(1..=30).contains(&scale) => Err("scale must lie in 1..=30".into()),
            _ => Ok(()),
        }
    }

    pub fn num_vertices(&self) -> usize {
        match *self {
            GraphSpec::Complete { n } | GraphSpec::Path { n } | GraphSpec::Cycle { n } | GraphSpec::ErdosRenyi { n, .. } => n,
            GraphSpec::Star { leaves } => leaves + 1,
            GraphSpec::Rmat { scale, .. } => 1 << scale,
        }
    }

    /// Raw edge list; rmat output may contain loops and repeats.
    pub fn edges(&self, seed: u64) -> Vec<(VertexId, VertexId)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            GraphSpec::Complete { n } => {
                let n = n as VertexId;
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
            }
            GraphSpec::Star { leaves } => (1..=leaves as VertexId).map(|v| (0, v)).collect(),
            GraphSpec::Path { n } => (1..n as VertexId).map(|v| (v - 1, v)).collect(),
            GraphSpec::Cycle { n } => (0..n as VertexId).map(|v| (v, (v + 1) % n as VertexId)).collect(),
            GraphSpec::ErdosRenyi { n, p } => {
                let mut out = Vec::new();
                for u in 0..n as VertexId {
                    for v in u + 1..n as VertexId {
                        if rng.gen_bool(p) {
                            out.push((u, v));
                        }
                    }
                }
                out
            }
            GraphSpec::Rmat { scale, edge_factor } => {
                let (a, b, c) = RMAT_PROBS;
                (0..edge_factor << scale)
                    .map(|_| {
                        let (mut u, mut v) = (0, 0);
                        for _ in 0..scale {
                            let r: f64 = rng.gen();
                            let (du, dv) = if r < a {
                                (0, 0)
                            } else if r < a + b {
                                (0, 1)
                            } else if r < a + b + c {
                                (1, 0)
                            } else {
                                (1, 1)
                            };
                            u = u << 1 | du;
                            v = v << 1 | dv;
                        }
                        (u, v)
                    })
                    .collect()
            }
        }
    }

    /// Canonical graph over ids `0..num_vertices`, isolated vertices kept.
    pub fn build(&self, seed: u64) -> CanonicalGraph {
        CanonicalGraph::from_edges(self.num_vertices(), &self.edges(seed))
    }
}

/// Writes `u v` lines; loops and repeats of `edges` are written as given.
pub fn write_edges<W: Write>(edges: &[(VertexId, VertexId)], mut w: W) -> std::io::Result<()> {
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

/// Ids of a star whose center sits on worker 1 of 2 and whose leaves all sit
/// on worker 0. Odd ids other than the center stay isolated.
pub fn two_worker_star(leaves: usize) -> CanonicalGraph {
    let edges: Vec<(VertexId, VertexId)> = (0..leaves as VertexId).map(|i| (2 * i, 1)).collect();
    CanonicalGraph::from_edges(2 * leaves.max(1), &edges)
}
