use std::fmt;
use std::str::FromStr;

use crate::graph::Label;

use super::PlanError;

/// Symmetry-breaking constraint `vertex[smaller] < vertex[larger]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Restriction {
    pub smaller: usize,
    pub larger: usize,
}

/// How the vertex at one embedding position is chosen.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelSpec {
    /// Prior positions whose edge lists are intersected to get candidates.
    pub intersect: Vec<usize>,
    /// Prior positions the candidate must NOT be adjacent to.
    pub anti: Vec<usize>,
    /// Positions whose edge lists stay active in embeddings of this level.
    pub active: Vec<usize>,
    /// Embeddings created at this level carry the raw intersection of
    /// `intersect` so that the next extension can start from it.
    pub reuse: bool,
}

/// Enumeration program for one pattern, interpreted by
/// [`extend`](super::extend).
///
/// Level `i` describes how position `i` of an embedding is matched; level 0
/// is the root (no intersection). Embeddings of level `i` hold positions
/// `0..=i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchPlan {
    levels: Vec<LevelSpec>,
    restrictions: Vec<Restriction>,
    labels: Option<Vec<Label>>,
    // positions p with vertex[p] < new, per level
    lower: Vec<Vec<usize>>,
    // positions p with new < vertex[p], per level
    upper: Vec<Vec<usize>>,
}

fn sorted_unique(v: &mut Vec<usize>) {
    v.sort_unstable();
    v.dedup();
}

impl MatchPlan {
    /// Builds a plan and checks its structural invariants.
    pub fn new(mut levels: Vec<LevelSpec>, mut restrictions: Vec<Restriction>) -> Result<Self, PlanError> {
        for l in &mut levels {
            sorted_unique(&mut l.intersect);
            sorted_unique(&mut l.anti);
            sorted_unique(&mut l.active);
        }
        restrictions.sort_unstable();
        restrictions.dedup();
        let k = levels.len();
        let mut lower = vec![Vec::new(); k];
        let mut upper = vec![Vec::new(); k];
        for r in &restrictions {
            if r.smaller >= k || r.larger >= k || r.smaller == r.larger {
                return Err(PlanError::violation(r.smaller.max(r.larger), format!("bad restriction {}<{}", r.smaller, r.larger)));
            }
            if r.smaller < r.larger {
                lower[r.larger].push(r.smaller);
            } else {
                upper[r.smaller].push(r.larger);
            }
        }
        let plan = Self { levels, restrictions, labels: None, lower, upper };
        plan.check_structure()?;
        Ok(plan)
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self, PlanError> {
        if labels.len() != self.k() {
            return Err(PlanError::violation(0, format!("{} labels for {} levels", labels.len(), self.k())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &LevelSpec {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub(crate) fn lower_bounds(&self, level: usize) -> &[usize] {
        &self.lower[level]
    }

    pub(crate) fn upper_bounds(&self, level: usize) -> &[usize] {
        &self.upper[level]
    }

    pub fn active_after(&self, level: usize) -> &[usize] {
        &self.levels[level].active
    }

    pub fn is_active(&self, level: usize, position: usize) -> bool {
        self.levels[level].active.binary_search(&position).is_ok()
    }

    /// Whether embeddings created at `level` store their raw intersection.
    pub fn stores_intersection(&self, level: usize) -> bool {
        self.levels[level].reuse
    }

    /// The same plan with every symmetry-breaking restriction removed.
    pub fn without_restrictions(&self) -> MatchPlan {
        let mut p = MatchPlan::new(self.levels.clone(), Vec::new()).expect("structure already checked");
        p.labels = self.labels.clone();
        p
    }

    /// Stable textual fingerprint used to detect plan mismatch across workers.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the text form
        self.to_string()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3))
    }

    pub(crate) fn check_structure(&self) -> Result<(), PlanError> {
        let k = self.k();
        if k < 2 {
            return Err(PlanError::violation(0, "plans need at least two levels".into()));
        }
        for (i, l) in self.levels.iter().enumerate() {
            if i == 0 {
                if !l.intersect.is_empty() || !l.anti.is_empty() {
                    return Err(PlanError::violation(0, "root level cannot intersect".into()));
                }
            } else {
                if l.intersect.is_empty() {
                    return Err(PlanError::violation(i, "intersect sources are empty".into()));
                }
                if let Some(p) = l.intersect.iter().chain(&l.anti).find(|&&p| p >= i) {
                    return Err(PlanError::violation(i, format!("source position {p} is not a prior position")));
                }
                if let Some(p) = l.anti.iter().find(|p| l.intersect.contains(p)) {
                    return Err(PlanError::violation(i, format!("position {p} is both intersect and anti source")));
                }
            }
            if let Some(p) = l.active.iter().find(|&&p| p > i) {
                return Err(PlanError::violation(i, format!("active position {p} does not exist yet")));
            }
            if l.reuse {
                if i == 0 || i + 1 >= k {
                    return Err(PlanError::violation(i, "reuse requires a following extension".into()));
                }
                let next = &self.levels[i + 1].intersect;
                if !l.intersect.iter().all(|p| next.contains(p)) {
                    return Err(PlanError::violation(i, "stored intersection is not a prefix of the next level's sources".into()));
                }
            }
        }
        // anti-monotonicity: a position inactive at level i stays inactive below
        for i in 0..k {
            for p in 0..=i {
                if self.is_active(i, p) {
                    continue;
                }
                if let Some(j) = (i + 1..k).find(|&j| self.is_active(j, p)) {
                    return Err(PlanError::violation(j, format!("position {p} re-enters the active set after level {i}")));
                }
            }
        }
        // every future need stays active
        for i in 0..k {
            for j in i + 1..k {
                let l = &self.levels[j];
                if let Some(p) = l.intersect.iter().chain(&l.anti).find(|&&p| p <= i && !self.is_active(i, p)) {
                    return Err(PlanError::violation(i, format!("position {p} is needed at level {j} but inactive")));
                }
            }
        }
        Ok(())
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[usize]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

/// One line per level:
/// `level i: intersect=[..] anti=[..] restrict=[a<b,..] active=[..] reuse=0|1`
impl fmt::Display for MatchPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.levels.iter().enumerate() {
            write!(f, "level {i}: intersect=")?;
            write_list(f, &l.intersect)?;
            write!(f, " anti=")?;
            write_list(f, &l.anti)?;
            write!(f, " restrict=[")?;
            let rs: Vec<_> = self.restrictions.iter().filter(|r| r.smaller.max(r.larger) == i).collect();
            for (j, r) in rs.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}<{}", r.smaller, r.larger)?;
            }
            write!(f, "] active=")?;
            write_list(f, &l.active)?;
            write!(f, " reuse={}", u8::from(l.reuse))?;
            if let Some(labels) = &self.labels {
                write!(f, " label={}", labels[i])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn parse_list(s: &str, line: usize) -> Result<Vec<&str>, PlanError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| PlanError::Parse { line, reason: format!("expected [..], got {s:?}") })?;
    Ok(inner.split(',').map(str::trim).filter(|t| !t.is_empty()).collect())
}

fn parse_usize(s: &str, line: usize) -> Result<usize, PlanError> {
    s.parse().map_err(|_| PlanError::Parse { line, reason: format!("bad integer {s:?}") })
}

impl FromStr for MatchPlan {
    type Err = PlanError;

    fn from_str(text: &str) -> Result<Self, PlanError> {
        let mut levels = Vec::new();
        let mut restrictions = Vec::new();
        let mut labels = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (head, body) = t
                .split_once(':')
                .ok_or_else(|| PlanError::Parse { line, reason: "missing ':'".into() })?;
            let level = head
                .trim()
                .strip_prefix("level")
                .map(str::trim)
                .ok_or_else(|| PlanError::Parse { line, reason: "expected 'level i:'".into() })
                .and_then(|n| parse_usize(n, line))?;
            if level != levels.len() {
                return Err(PlanError::Parse { line, reason: format!("expected level {}, found {level}", levels.len()) });
            }
            let mut spec = LevelSpec::default();
            for field in body.split_whitespace() {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| PlanError::Parse { line, reason: format!("bad field {field:?}") })?;
                match key {
                    "intersect" | "anti" | "active" => {
                        let xs = parse_list(value, line)?
                            .into_iter()
                            .map(|x| parse_usize(x, line))
                            .collect::<Result<Vec<_>, _>>()?;
                        match key {
                            "intersect" => spec.intersect = xs,
                            "anti" => spec.anti = xs,
                            _ => spec.active = xs,
                        }
                    }
                    "restrict" => {
                        for r in parse_list(value, line)? {
                            let (a, b) = r
                                .split_once('<')
                                .ok_or_else(|| PlanError::Parse { line, reason: format!("bad restriction {r:?}") })?;
                            restrictions.push(Restriction { smaller: parse_usize(a, line)?, larger: parse_usize(b, line)? });
                        }
                    }
                    "reuse" => spec.reuse = parse_usize(value, line)? != 0,
                    "label" => labels.push(
                        value.parse::<Label>().map_err(|_| PlanError::Parse { line, reason: format!("bad label {value:?}") })?,
                    ),
                    other => return Err(PlanError::Parse { line, reason: format!("unknown field {other:?}") }),
                }
            }
            levels.push(spec);
        }
        let plan = MatchPlan::new(levels, restrictions)?;
        match labels.len() {
            0 => Ok(plan),
            _ => plan.with_labels(labels),
        }
    }
}
