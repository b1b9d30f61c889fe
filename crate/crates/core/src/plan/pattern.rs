use crate::graph::Label;

use super::PlanError;

/// A small connected pattern graph over vertices `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    name: String,
    k: usize,
    adjacency: Vec<u32>,
    labels: Option<Vec<Label>>,
}

impl Pattern {
    pub fn new(name: impl Into<String>, k: usize, edges: &[(usize, usize)]) -> Result<Self, PlanError> {
        let name = name.into();
        if k == 0 || k > 16 {
            return Err(PlanError::Pattern(format!("{name}: size {k} not in [1, 16]")));
        }
        let mut adjacency = vec![0u32; k];
        for &(a, b) in edges {
            if a >= k || b >= k {
                return Err(PlanError::Pattern(format!("{name}: edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(PlanError::Pattern(format!("{name}: self-loop on {a}")));
            }
            adjacency[a] |= 1 << b;
            adjacency[b] |= 1 << a;
        }
        let p = Self { name, k, adjacency, labels: None };
        if !p.is_connected() {
            return Err(PlanError::Pattern(format!("{}: not connected", p.name)));
        }
        Ok(p)
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self, PlanError> {
        if labels.len() != self.k {
            return Err(PlanError::Pattern(format!("{}: {} labels for {} vertices", self.name, labels.len(), self.k)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn clique(k: usize) -> Self {
        let edges: Vec<_> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        let name = if k == 3 { "triangle".to_string() } else { format!("{k}-clique") };
        Self::new(name, k, &edges).expect("clique is connected")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a] >> b & 1 == 1
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adjacency[a].count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|a| (a + 1..self.k).filter(move |&b| self.adjacent(a, b)).map(move |b| (a, b)))
            .collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            for v in 0..self.k {
                if frontier >> v & 1 == 1 {
                    next |= self.adjacency[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_patterns() {
        assert!(Pattern::new("x", 0, &[]).is_err());
        assert!(Pattern::new("loop", 2, &[(0, 0), (0, 1)]).is_err());
        assert!(Pattern::new("split", 4, &[(0, 1), (2, 3)]).is_err());
        assert!(Pattern::new("dot", 1, &[]).is_ok());
    }

    #[test]
    fn clique_shape() {
        let p = Pattern::clique(5);
        assert_eq!(p.edges().len(), 10);
        assert_eq!(p.name(), "5-clique");
        assert_eq!(Pattern::clique(3).name(), "triangle");
        assert!((0..5).all(|v| p.degree(v) == 4));
    }
}
