//! Mapping metrics, ground-truth rasters, simulated sampling, baseline
//! planners and the budget-sweep experiment runner.

mod experiment;
mod lawnmower;
mod metrics;
mod raster;
mod sampling;
mod synthetic;
mod tsp;

pub use experiment::{
    cell_seed, fit_model, interpolation_nodes, plan_survey, predict_grid, run_experiment,
    score_observations, CellResult, CellStatus, ExperimentConfig, ExperimentResult, FieldScore,
    GridPrediction, MetricsReport, ModelConfig, TrendMode,
};
pub use lawnmower::{baseline_lawnmower, lawnmower_samples, tour_energy};
pub use metrics::{akv, rmse};
pub use raster::{FieldRaster, MAX_RASTER_NODES};
pub use sampling::sample_field;
pub use synthetic::{gen_synthetic_field, Trend, MAX_SYNTHETIC_NODES};
pub use tsp::{baseline_tsp, plan_tsp_mission, solve_tsp, tour_length, TspOutcome, EXACT_TSP_MAX};

use serde::{Deserialize, Serialize};

use crate::density::DensityError;
use crate::field::FieldError;
use crate::geometry::Point2;

#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("interpolation node set is empty")]
    EmptyNodeSet,
    #[error("negative variance {0}")]
    NegativeVariance(f64),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("waypoints outside the raster extent or next to no-data: {0:?}")]
    OutsideRaster(Vec<usize>),
    #[error(
        "{nodes} grid nodes exceed the dense-factorization limit of {max}; use a smaller grid"
    )]
    GridTooLarge { nodes: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("TSP solver hit its time limit")]
    TimedOut,
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Planner {
    /// Hexagonal lattice with the coverage cycle.
    Hgc,
    /// Same lattice, tour from the TSP heuristic.
    Tsp,
    /// Parallel transects on a square lattice.
    Lawnmower,
}

impl Planner {
    pub fn name(&self) -> &'static str {
        match self {
            Planner::Hgc => "hgc",
            Planner::Tsp => "tsp",
            Planner::Lawnmower => "lawnmower",
        }
    }
}

impl std::str::FromStr for Planner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hgc" => Ok(Planner::Hgc),
            "tsp" | "hgtsp" => Ok(Planner::Tsp),
            "lawnmower" => Ok(Planner::Lawnmower),
            other => Err(format!("unknown planner {other:?} (hgc, tsp, lawnmower)")),
        }
    }
}

/// Planner-independent closed survey tour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPlan {
    pub planner: Planner,
    /// Sample spacing.
    pub density: f64,
    /// Hexagon edge length for lattice planners.
    pub edge_length: Option<f64>,
    pub budget: f64,
    pub energy: f64,
    /// Candidate sampling locations at the chosen spacing.
    pub candidate_count: usize,
    /// Samples on the tour.
    pub sample_count: usize,
    pub waypoints: Vec<Point2>,
}
