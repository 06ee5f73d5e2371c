//! Closed coverage cycles over the SLoI lattice.
//!
//! Construction runs in three stages: rule-based edges over full coarse
//! cells, V-/Z-rewiring to absorb the remaining SLoIs, and pairwise cycle
//! merging.

mod cover;
mod cycle;
mod planner;
mod repair;

pub use cycle::{closed_length, validate_cycle, CycleReport, PathCycle};
pub use planner::{
    combine_cycles, gen_coverage_path_cycle, plan_coverage, plan_coverage_with, v_modification,
    z_modification, CoverageOutcome, PlannerOptions, ZPattern,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum PlanError {
    #[error("need at least 3 sampling locations to form a cycle, got {0}")]
    TooFewSlois(usize),
    #[error("no lattice triangle exists among the sampling locations")]
    NoCycle,
    #[error("coverage incomplete: {} sampling locations unvisited", .0.report.unvisited.len())]
    PartialCoverage(Box<CoverageOutcome>),
    #[error("{cycles} cycles remain with no adjacent edge pair to merge")]
    MergeFailure { cycles: usize },
    #[error("modification precondition violated: {0}")]
    Precondition(String),
    #[error("internal planner error: {0}")]
    Internal(String),
}
