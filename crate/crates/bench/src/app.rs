//! Application names accepted on the command line.

use std::fmt;
use std::str::FromStr;

use gpm_core::graph::Label;
use gpm_core::plan::{clique_plan, MatchPlan, Pattern, PatternApp, PlanError, Restriction};

use crate::oracle::{OracleError, OraclePattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppSpec {
    Triangle,
    Motif3,
    Motif4,
    Clique(usize),
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("unknown app {0:?}: expected tc, 3mc, 4mc or kcc:K with K >= 3")]
pub struct AppParseError(String);

impl FromStr for AppSpec {
    type Err = AppParseError;

    fn from_str(s: &str) -> Result<Self, AppParseError> {
        match s {
            "tc" => Ok(AppSpec::Triangle),
            "3mc" => Ok(AppSpec::Motif3),
            "4mc" => Ok(AppSpec::Motif4),
            _ => match s.strip_prefix("kcc:").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 3 => Ok(AppSpec::Clique(k)),
                _ => Err(AppParseError(s.to_string())),
            },
        }
    }
}

impl fmt::Display for AppSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppSpec::Triangle => f.write_str("tc"),
            AppSpec::Motif3 => f.write_str("3mc"),
            AppSpec::Motif4 => f.write_str("4mc"),
            AppSpec::Clique(k) => write!(f, "kcc:{k}"),
        }
    }
}

impl AppSpec {
    pub fn is_clique(&self) -> bool {
        matches!(self, AppSpec::Triangle | AppSpec::Clique(_))
    }

    pub fn clique_size(&self) -> Option<usize> {
        match self {
            AppSpec::Triangle => Some(3),
            AppSpec::Clique(k) => Some(*k),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<PatternApp, PlanError> {
        match *self {
            AppSpec::Triangle => Ok(PatternApp::triangle_count()),
            AppSpec::Motif3 => PatternApp::motif_count(3),
            AppSpec::Motif4 => PatternApp::motif_count(4),
            AppSpec::Clique(k) => PatternApp::clique_count(k),
        }
    }

    /// Clique app whose pattern vertices carry `labels`. Only plan positions
    /// with equal labels are ordered against each other.
    pub fn build_labeled(&self, labels: &[Label]) -> Result<PatternApp, PlanError> {
        let k = self.clique_size().ok_or_else(|| PlanError::Unsupported("pattern labels need tc or kcc:K".into()))?;
        if labels.len() != k {
            return Err(PlanError::Unsupported(format!("{} pattern labels for a {k}-clique", labels.len())));
        }
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        let base = clique_plan(k)?;
        let restrictions = (1..k)
            .filter(|&i| labels[i - 1] == labels[i])
            .map(|i| Restriction { smaller: i - 1, larger: i })
            .collect();
        let plan = MatchPlan::new(base.levels().to_vec(), restrictions)?.with_labels(labels.clone())?;
        let pattern = Pattern::clique(k).with_labels(labels)?;
        Ok(PatternApp::custom(vec![(pattern, plan)]))
    }
}

/// Oracle-side copy of an engine pattern: structure and labels only.
pub fn oracle_pattern(p: &Pattern) -> Result<OraclePattern, OracleError> {
    let o = OraclePattern::new(p.size(), &p.edges())?;
    Ok(match p.labels() {
        Some(l) => o.with_labels(l.to_vec()),
        None => o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_app_names() {
        assert_eq!("tc".parse(), Ok(AppSpec::Triangle));
        assert_eq!("kcc:5".parse(), Ok(AppSpec::Clique(5)));
        for bad in ["kcc:2", "kcc:", "5cc", "tc ", ""] {
            assert!(bad.parse::<AppSpec>().is_err(), "{bad}");
        }
        for s in ["tc", "3mc", "4mc", "kcc:4"] {
            assert_eq!(s.parse::<AppSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn motif_apps_have_all_connected_patterns() {
        assert_eq!(AppSpec::Motif3.build().unwrap().entries().len(), 2);
        assert_eq!(AppSpec::Motif4.build().unwrap().entries().len(), 6);
    }

    #[test]
    fn labeled_clique_restrictions_follow_label_groups() {
        let app = AppSpec::Triangle.build_labeled(&[1, 0, 0]).unwrap();
        let (pattern, plan) = &app.entries()[0];
        assert_eq!(pattern.labels(), Some(&[0, 0, 1][..]));
        assert_eq!(plan.restrictions(), &[Restriction { smaller: 0, larger: 1 }]);
        assert!(AppSpec::Motif3.build_labeled(&[0, 0, 0]).is_err());
        assert!(AppSpec::Triangle.build_labeled(&[0, 0]).is_err());
    }
}
