//! Exhaustive pattern counter used to check the engine.
//!
//! Shares no enumeration or intersection code with `gpm_core::plan`: it
//! walks every k-subset of vertices over a dense adjacency bit matrix and
//! classifies the induced subgraph by brute force over permutations.

use std::collections::HashMap;

/// Upper bound on `C(n, k) * k^2`.
pub const MAX_WORK: f64 = 1e9;
pub const MAX_K: usize = 6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("graph too large for exhaustive enumeration: C({n}, {k}) * {k}^2 = {work:.3e} > {MAX_WORK:.0e}")]
    TooLarge { n: usize, k: usize, work: f64 },
    #[error("pattern size {0} unsupported (2..={MAX_K})")]
    PatternSize(usize),
    #[error("pattern edge ({0}, {1}) out of range")]
    BadEdge(usize, usize),
    #[error("pattern is labeled but the graph is not")]
    MissingLabels,
}

/// Whether a match must reproduce non-edges too.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    VertexInduced,
    EdgeInduced,
}

#[derive(Debug, Clone)]
pub struct OracleGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    labels: Option<Vec<u32>>,
}

impl OracleGraph {
    /// Undirected simple graph; loops and repeated edges are ignored.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let words = n.div_ceil(64);
        let mut g = Self { n, words, bits: vec![0; n * words], labels: None };
        for (u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u != v {
                g.bits[u * g.words + v / 64] |= 1 << (v % 64);
                g.bits[v * g.words + u / 64] |= 1 << (u % 64);
            }
        }
        g
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePattern {
    k: usize,
    mask: u32,
    labels: Option<Vec<u32>>,
}

impl OraclePattern {
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Self, OracleError> {
        if !(2..=MAX_K).contains(&k) {
            return Err(OracleError::PatternSize(k));
        }
        let mut mask = 0;
        for &(a, b) in edges {
            if a >= k || b >= k || a == b {
                return Err(OracleError::BadEdge(a, b));
            }
            mask |= 1 << pair(a, b, k);
        }
        Ok(Self { k, mask, labels: None })
    }

    pub fn clique(k: usize) -> Result<Self, OracleError> {
        let edges: Vec<_> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        Self::new(k, &edges)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Self {
        assert_eq!(labels.len(), self.k);
        self.labels = Some(labels);
        self
    }

    pub fn size(&self) -> usize {
        self.k
    }

    /// Number of label- and edge-preserving self-maps.
    pub fn automorphisms(&self) -> u64 {
        let labels = self.labels.as_deref();
        permutations(self.k)
            .iter()
            .filter(|p| permute(self.mask, p, self.k) == self.mask && labels.is_none_or(|l| (0..self.k).all(|i| l[p[i]] == l[i])))
            .count() as u64
    }
}

// bit index of the unordered pair {a, b}
fn pair(a: usize, b: usize, k: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * k - a * (a + 1) / 2 + (b - a - 1)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn heap(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, cur, out);
            if n.is_multiple_of(2) {
                cur.swap(i, n - 1);
            } else {
                cur.swap(0, n - 1);
            }
        }
        heap(n - 1, cur, out);
    }
    heap(k, &mut cur, &mut out);
    out
}

// image of an edge mask when position i is renamed p[i]
fn permute(mask: u32, p: &[usize], k: usize) -> u32 {
    let mut out = 0;
    for a in 0..k {
        for b in a + 1..k {
            if mask >> pair(a, b, k) & 1 == 1 {
                out |= 1 << pair(p[a], p[b], k);
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn check_size(n: usize, k: usize) -> Result<(), OracleError> {
    if !(2..=MAX_K).contains(&k) {
        return Err(OracleError::PatternSize(k));
    }
    let work = if n < k { 0.0 } else { binomial(n, k) * (k * k) as f64 };
    if work > MAX_WORK {
        return Err(OracleError::TooLarge { n, k, work });
    }
    Ok(())
}

/// Histogram of induced edge masks over all k-subsets of an unlabeled graph.
/// One census answers every unlabeled pattern of size k.
#[derive(Debug, Clone)]
pub struct Census {
    k: usize,
    hist: Vec<u64>,
}

impl Census {
    pub fn new(g: &OracleGraph, k: usize) -> Result<Self, OracleError> {
        check_size(g.n, k)?;
        let mut hist = vec![0u64; 1 << (k * (k - 1) / 2)];
        let mut chosen = Vec::with_capacity(k);
        walk(g, k, 0, 0, &mut chosen, &mut |mask, _| hist[mask as usize] += 1);
        Ok(Self { k, hist })
    }

    pub fn count(&self, p: &OraclePattern, sem: Semantics) -> u64 {
        assert_eq!(p.k, self.k, "pattern size differs from census size");
        let k = self.k;
        let perms = permutations(k);
        let images: Vec<u32> = perms.iter().map(|q| permute(p.mask, q, k)).collect();
        let mut total = 0;
        for (mask, &n) in self.hist.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let mask = mask as u32;
            let hits = match sem {
                Semantics::VertexInduced => images.iter().filter(|&&m| m == mask).count(),
                Semantics::EdgeInduced => images.iter().filter(|&&m| m & mask == m).count(),
            } as u64;
            total += n * hits;
        }
        total / p.automorphisms()
    }
}

// every k-subset in increasing order, with the induced mask over positions
fn walk(g: &OracleGraph, k: usize, start: usize, mask: u32, chosen: &mut Vec<usize>, f: &mut impl FnMut(u32, &[usize])) {
    let j = chosen.len();
    if j == k {
        f(mask, chosen);
        return;
    }
    for v in start..g.n {
        if g.n - v < k - j {
            break;
        }
        let mut m = mask;
        for (i, &u) in chosen.iter().enumerate() {
            if g.adjacent(u, v) {
                m |= 1 << pair(i, j, k);
            }
        }
        chosen.push(v);
        walk(g, k, v + 1, m, chosen, f);
        chosen.pop();
    }
}

/// Exact number of subgraphs of `g` isomorphic to `p` under `sem`.
pub fn oracle_count(g: &OracleGraph, p: &OraclePattern, sem: Semantics) -> Result<u64, OracleError> {
    let Some(plabels) = &p.labels else {
        return Ok(Census::new(g, p.k)?.count(p, sem));
    };
    let glabels = g.labels.as_ref().ok_or(OracleError::MissingLabels)?;
    check_size(g.n, p.k)?;
    let k = p.k;
    let perms = permutations(k);
    let images: Vec<u32> = perms.iter().map(|q| permute(p.mask, q, k)).collect();
    let mut total = 0u64;
    walk(g, k, 0, 0, &mut Vec::with_capacity(k), &mut |mask, chosen| {
        for (q, &img) in perms.iter().zip(&images) {
            let edges_ok = match sem {
                Semantics::VertexInduced => img == mask,
                Semantics::EdgeInduced => img & mask == img,
            };
            // pattern position i sits on chosen[q[i]]
            if edges_ok && (0..k).all(|i| plabels[i] == glabels[chosen[q[i]]]) {
                total += 1;
            }
        }
    });
    Ok(total / p.automorphisms())
}

/// All isomorphism classes of connected graphs on k vertices, each with its
/// count in `census` (vertex-induced).
pub fn connected_classes(census: &Census) -> Vec<(u32, u64)> {
    let k = census.k;
    let perms = permutations(k);
    let mut by_canon: HashMap<u32, u64> = HashMap::new();
    for mask in 0..1u32 << (k * (k - 1) / 2) {
        if !connected(mask, k) {
            continue;
        }
        let canon = perms.iter().map(|q| permute(mask, q, k)).min().unwrap();
        *by_canon.entry(canon).or_default() += census.hist[mask as usize];
    }
    let mut v: Vec<_> = by_canon.into_iter().collect();
    v.sort_unstable();
    v
}

fn connected(mask: u32, k: usize) -> bool {
    let mut seen = 1u32;
    let mut stack = vec![0];
    while let Some(a) = stack.pop() {
        for b in 0..k {
            if b != a && seen >> b & 1 == 0 && mask >> pair(a, b, k) & 1 == 1 {
                seen |= 1 << b;
                stack.push(b);
            }
        }
    }
    seen == (1 << k) - 1
}
