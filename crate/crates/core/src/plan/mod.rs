//! Patterns, enumeration plans and the `extend` interpreter.

mod apps;
mod extend;
pub mod intersect;
mod matchplan;
mod pattern;

pub use apps::{clique_plan, count_local, motif_plans, validate_plan, AppKind, PatternApp};
pub use extend::{extend, ChildSet, EmbeddingAccess, ExtendOptions, ExtendStats, Scratch};
pub use matchplan::{LevelSpec, MatchPlan, Restriction};
pub use pattern::Pattern;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("plan violation at level {level}: {reason}")]
    Violation { level: usize, reason: String },
    #[error("plan file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid pattern: {0}")]
    Pattern(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("plan matches pattern {pattern} {count} times in itself, expected 1")]
    SelfMatch { pattern: String, count: u64 },
    #[error("extend called on a non-ready embedding at level {level}")]
    NotReady { level: usize },
    #[error("plan expects a stored intersection at level {level} but the embedding carries none")]
    ReuseMissing { level: usize },
}

impl PlanError {
    pub(crate) fn violation(level: usize, reason: String) -> Self {
        PlanError::Violation { level, reason }
    }
}
