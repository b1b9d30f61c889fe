use crate::graph::{Label, VertexId};

use super::intersect::{difference_into, intersect_into};
use super::{MatchPlan, PlanError};

/// Read access to one extendable embedding: its vertices, its active edge
/// lists and the intermediate intersection it carries.
pub trait EmbeddingAccess {
    /// Depth in the embedding tree; the embedding holds `level + 1` vertices.
    fn level(&self) -> usize;
    fn vertex(&self, position: usize) -> VertexId;
    /// Edge list of an active position. Only called for positions the plan
    /// marks active at this level.
    fn edge_list(&self, position: usize) -> &[VertexId];
    /// Raw intersection stored when this embedding was created.
    fn reuse(&self) -> Option<&[VertexId]> {
        None
    }
    fn is_ready(&self) -> bool {
        true
    }
}

/// Knobs that change how candidates are computed but never which.
#[derive(Debug, Clone, Copy)]
pub struct ExtendOptions<'a> {
    pub computation_reuse: bool,
    /// Global vertex labels, consulted only when the plan is labeled.
    pub labels: Option<&'a [Label]>,
}

impl Default for ExtendOptions<'_> {
    fn default() -> Self {
        Self { computation_reuse: true, labels: None }
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ExtendStats {
    /// Pairwise list intersections performed.
    pub intersections: u64,
    /// Pairwise list differences performed for anti sources.
    pub differences: u64,
}

impl ExtendStats {
    pub fn add(&mut self, other: &ExtendStats) {
        self.intersections += other.intersections;
        self.differences += other.differences;
    }
}

/// Reusable buffers for [`extend`].
#[derive(Debug, Default)]
pub struct Scratch {
    a: Vec<VertexId>,
    b: Vec<VertexId>,
    order: Vec<usize>,
}

/// Children produced by one extension.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChildSet {
    /// New vertices, ascending; one child embedding per entry.
    pub vertices: Vec<VertexId>,
    /// Raw intersection the children must carry, when the plan stores one.
    pub reuse: Option<Vec<VertexId>>,
}

impl ChildSet {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Extends `e` by one position according to `plan`.
///
/// When the next position is the last one, `emit` is called once per match
/// and the returned set is empty. Otherwise one child vertex per candidate is
/// returned, with the raw intersection attached when the plan asks the next
/// level to store it.
pub fn extend<E, F>(
    plan: &MatchPlan,
    e: &E,
    opts: ExtendOptions<'_>,
    scratch: &mut Scratch,
    stats: &mut ExtendStats,
    mut emit: F,
) -> Result<ChildSet, PlanError>
where
    E: EmbeddingAccess + ?Sized,
    F: FnMut(&E, VertexId),
{
    if !e.is_ready() {
        return Err(PlanError::NotReady { level: e.level() });
    }
    let level = e.level();
    let next = level + 1;
    if next >= plan.k() {
        return Err(PlanError::violation(level, "embedding is already complete".into()));
    }
    let spec = plan.level(next);
    let Scratch { a, b, order } = scratch;

    // raw intersection of the sources, into `a`
    let from_parent = opts.computation_reuse && plan.stores_intersection(level);
    if from_parent {
        let base = e.reuse().ok_or(PlanError::ReuseMissing { level })?;
        a.clear();
        a.extend_from_slice(base);
        let stored = &plan.level(level).intersect;
        for &p in spec.intersect.iter().filter(|p| !stored.contains(p)) {
            intersect_into(a, e.edge_list(p), b);
            std::mem::swap(a, b);
            stats.intersections += 1;
        }
    } else {
        order.clear();
        order.extend_from_slice(&spec.intersect);
        order.sort_by_key(|&p| e.edge_list(p).len());
        a.clear();
        a.extend_from_slice(e.edge_list(order[0]));
        for &p in &order[1..] {
            intersect_into(a, e.edge_list(p), b);
            std::mem::swap(a, b);
            stats.intersections += 1;
        }
    }
    let last = next + 1 == plan.k();
    let reuse = (!last && opts.computation_reuse && plan.stores_intersection(next)).then(|| a.clone());

    // anti sources (vertex-induced exclusions)
    for &p in &spec.anti {
        difference_into(a, e.edge_list(p), b);
        std::mem::swap(a, b);
        stats.differences += 1;
    }

    let lower = plan
        .lower_bounds(next)
        .iter()
        .map(|&p| e.vertex(p))
        .max();
    let upper = plan
        .upper_bounds(next)
        .iter()
        .map(|&p| e.vertex(p))
        .min();
    let start = lower.map_or(0, |lo| a.partition_point(|&c| c <= lo));
    let end = upper.map_or(a.len(), |hi| a.partition_point(|&c| c < hi));
    let want_label = plan.labels().map(|l| l[next]);

    let mut children = Vec::new();
    for &c in a.get(start..end.max(start)).unwrap_or(&[]) {
        if (0..=level).any(|p| e.vertex(p) == c) {
            continue;
        }
        if let (Some(want), Some(labels)) = (want_label, opts.labels) {
            if labels[c as usize] != want {
                continue;
            }
        }
        if last {
            emit(e, c);
        } else {
            children.push(c);
        }
    }
    Ok(ChildSet { vertices: children, reuse: reuse.filter(|_| !last) })
}
