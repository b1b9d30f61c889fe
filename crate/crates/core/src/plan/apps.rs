//! Hand-written enumeration plans for the shipped applications.

use crate::graph::{CanonicalGraph, VertexId};

use super::{
    extend, EmbeddingAccess, ExtendOptions, ExtendStats, LevelSpec, MatchPlan, Pattern, PlanError, Restriction,
    Scratch,
};

fn lt(smaller: usize, larger: usize) -> Restriction {
    Restriction { smaller, larger }
}

fn lvl(intersect: &[usize], anti: &[usize], active: &[usize], reuse: bool) -> LevelSpec {
    LevelSpec { intersect: intersect.to_vec(), anti: anti.to_vec(), active: active.to_vec(), reuse }
}

/// k-clique plan: every level intersects all prior lists, ids strictly
/// increase along the embedding, and each level from 2 on stores its running
/// intersection for the next one.
pub fn clique_plan(k: usize) -> Result<MatchPlan, PlanError> {
    if k < 3 {
        return Err(PlanError::Unsupported(format!("{k}-clique")));
    }
    let levels = (0..k)
        .map(|i| LevelSpec {
            intersect: (0..i).collect(),
            anti: vec![],
            active: if i + 1 < k { (0..=i).collect() } else { vec![] },
            reuse: i >= 2 && i + 1 < k,
        })
        .collect();
    let restrictions = (1..k).map(|i| lt(i - 1, i)).collect();
    MatchPlan::new(levels, restrictions)
}

/// Vertex-induced plans for every connected pattern of size `k`.
pub fn motif_plans(k: usize) -> Result<Vec<(Pattern, MatchPlan)>, PlanError> {
    let p = |name: &str, k: usize, edges: &[(usize, usize)]| Pattern::new(name, k, edges).expect("static pattern");
    match k {
        3 => Ok(vec![
            (Pattern::clique(3), clique_plan(3)?),
            (
                // center first, then the two leaves
                p("wedge", 3, &[(0, 1), (0, 2)]),
                MatchPlan::new(
                    vec![lvl(&[], &[], &[0], false), lvl(&[0], &[], &[0, 1], false), lvl(&[0], &[1], &[], false)],
                    vec![lt(1, 2)],
                )?,
            ),
        ]),
        4 => Ok(vec![
            (
                // inner edge (0,1) first, then the ends: 2-0-1-3
                p("4-path", 4, &[(2, 0), (0, 1), (1, 3)]),
                MatchPlan::new(
                    vec![
                        lvl(&[], &[], &[0], false),
                        lvl(&[0], &[], &[0, 1], false),
                        lvl(&[0], &[1], &[0, 1, 2], false),
                        lvl(&[1], &[0, 2], &[], false),
                    ],
                    vec![lt(0, 1)],
                )?,
            ),
            (
                p("3-star", 4, &[(0, 1), (0, 2), (0, 3)]),
                MatchPlan::new(
                    vec![
                        lvl(&[], &[], &[0], false),
                        lvl(&[0], &[], &[0, 1], false),
                        lvl(&[0], &[1], &[0, 1, 2], false),
                        lvl(&[0], &[1, 2], &[], false),
                    ],
                    vec![lt(1, 2), lt(2, 3)],
                )?,
            ),
            (
                // cycle 0-1-3-2-0
                p("4-cycle", 4, &[(0, 1), (1, 3), (3, 2), (2, 0)]),
                MatchPlan::new(
                    vec![
                        lvl(&[], &[], &[0], false),
                        lvl(&[0], &[], &[0, 1], false),
                        lvl(&[0], &[1], &[0, 1, 2], false),
                        lvl(&[1, 2], &[0], &[], false),
                    ],
                    vec![lt(0, 1), lt(0, 2), lt(0, 3), lt(1, 2)],
                )?,
            ),
            (
                // triangle 0,1,2 with tail 3 on vertex 0
                p("tailed-triangle", 4, &[(0, 1), (0, 2), (1, 2), (0, 3)]),
                MatchPlan::new(
                    vec![
                        lvl(&[], &[], &[0], false),
                        lvl(&[0], &[], &[0, 1], false),
                        lvl(&[0, 1], &[], &[0, 1, 2], false),
                        lvl(&[0], &[1, 2], &[], false),
                    ],
                    vec![lt(1, 2)],
                )?,
            ),
            (
                // 0,1 are the degree-3 vertices, 2,3 the degree-2 ones
                p("diamond", 4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]),
                MatchPlan::new(
                    vec![
                        lvl(&[], &[], &[0], false),
                        lvl(&[0], &[], &[0, 1], false),
                        lvl(&[0, 1], &[], &[0, 1, 2], true),
                        lvl(&[0, 1], &[2], &[], false),
                    ],
                    vec![lt(0, 1), lt(2, 3)],
                )?,
            ),
            (Pattern::clique(4), clique_plan(4)?),
        ]),
        _ => Err(PlanError::Unsupported(format!("{k}-motif"))),
    }
}

/// The counting applications the engine ships with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppKind {
    TriangleCount,
    CliqueCount(usize),
    MotifCount(usize),
    Custom,
}

/// A named set of (pattern, plan) pairs whose match counts are reported
/// per pattern.
#[derive(Debug, Clone)]
pub struct PatternApp {
    kind: AppKind,
    entries: Vec<(Pattern, MatchPlan)>,
}

impl PatternApp {
    pub fn triangle_count() -> Self {
        Self { kind: AppKind::TriangleCount, entries: vec![(Pattern::clique(3), clique_plan(3).expect("k=3"))] }
    }

    pub fn clique_count(k: usize) -> Result<Self, PlanError> {
        Ok(Self { kind: AppKind::CliqueCount(k), entries: vec![(Pattern::clique(k), clique_plan(k)?)] })
    }

    pub fn motif_count(k: usize) -> Result<Self, PlanError> {
        Ok(Self { kind: AppKind::MotifCount(k), entries: motif_plans(k)? })
    }

    pub fn custom(entries: Vec<(Pattern, MatchPlan)>) -> Self {
        Self { kind: AppKind::Custom, entries }
    }

    /// Variant for a graph oriented into a DAG: the orientation already fixes
    /// one ordering per clique, so restrictions are dropped.
    pub fn for_oriented_graph(&self) -> Result<Self, PlanError> {
        match self.kind {
            AppKind::TriangleCount | AppKind::CliqueCount(_) => Ok(Self {
                kind: self.kind.clone(),
                entries: self.entries.iter().map(|(p, m)| (p.clone(), m.without_restrictions())).collect(),
            }),
            _ => Err(PlanError::Unsupported("orientation is only valid for clique counting".into())),
        }
    }

    pub fn kind(&self) -> &AppKind {
        &self.kind
    }

    pub fn entries(&self) -> &[(Pattern, MatchPlan)] {
        &self.entries
    }

    pub fn pattern_names(&self) -> Vec<&str> {
        self.entries.iter().map(|(p, _)| p.name()).collect()
    }

    pub fn fingerprint(&self) -> u64 {
        self.entries
            .iter()
            .fold(self.entries.len() as u64, |h, (_, m)| h.rotate_left(7) ^ m.fingerprint())
    }
}

struct StackEmbedding<'g> {
    graph: &'g CanonicalGraph,
    vertices: Vec<VertexId>,
    reuse: Vec<Option<Vec<VertexId>>>,
}

impl EmbeddingAccess for StackEmbedding<'_> {
    fn level(&self) -> usize {
        self.vertices.len() - 1
    }
    fn vertex(&self, p: usize) -> VertexId {
        self.vertices[p]
    }
    fn edge_list(&self, p: usize) -> &[VertexId] {
        self.graph.neighbors(self.vertices[p])
    }
    fn reuse(&self) -> Option<&[VertexId]> {
        self.reuse.last().and_then(|r| r.as_deref())
    }
}

/// Depth-first interpretation of `plan` over a whole in-memory graph.
///
/// Single-machine reference path: no chunks, no transport.
pub fn count_local(plan: &MatchPlan, graph: &CanonicalGraph, opts: ExtendOptions<'_>) -> Result<(u64, ExtendStats), PlanError> {
    fn recurse(
        plan: &MatchPlan,
        e: &mut StackEmbedding<'_>,
        opts: ExtendOptions<'_>,
        stats: &mut ExtendStats,
        count: &mut u64,
    ) -> Result<(), PlanError> {
        let mut scratch = Scratch::default();
        let set = extend(plan, &*e, opts, &mut scratch, stats, |_, _| *count += 1)?;
        for &c in &set.vertices {
            e.vertices.push(c);
            e.reuse.push(set.reuse.clone());
            recurse(plan, e, opts, stats, count)?;
            e.reuse.pop();
            e.vertices.pop();
        }
        Ok(())
    }
    let mut count = 0;
    let mut stats = ExtendStats::default();
    let root_label = plan.labels().map(|l| l[0]);
    for v in 0..graph.num_vertices() as VertexId {
        if let (Some(want), Some(labels)) = (root_label, opts.labels) {
            if labels[v as usize] != want {
                continue;
            }
        }
        let mut e = StackEmbedding { graph, vertices: vec![v], reuse: vec![None] };
        recurse(plan, &mut e, opts, &mut stats, &mut count)?;
    }
    Ok((count, stats))
}

/// Checks the plan's invariants and that it finds its own pattern exactly
/// once inside the pattern graph.
pub fn validate_plan(plan: &MatchPlan, pattern: &Pattern) -> Result<(), PlanError> {
    plan.check_structure()?;
    if plan.k() != pattern.size() {
        return Err(PlanError::violation(0, format!("plan has {} levels, pattern has {} vertices", plan.k(), pattern.size())));
    }
    let edges: Vec<(VertexId, VertexId)> = pattern.edges().iter().map(|&(a, b)| (a as VertexId, b as VertexId)).collect();
    let mut g = CanonicalGraph::from_edges(pattern.size(), &edges);
    if let Some(l) = pattern.labels() {
        g = g.with_dense_labels(l.to_vec()).map_err(|e| PlanError::Pattern(e.to_string()))?;
    }
    let opts = ExtendOptions { computation_reuse: true, labels: g.labels() };
    let (count, _) = count_local(plan, &g, opts)?;
    if count != 1 {
        return Err(PlanError::SelfMatch { pattern: pattern.name().to_string(), count });
    }
    Ok(())
}
