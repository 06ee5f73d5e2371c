//! Energy model, optimal sampling-density search and mission assembly.

mod mission;
mod search;

pub use mission::{plan_mission, EnergyBreakdown, Mission, MissionConfig};
pub(crate) use search::LevelSearch;
pub use search::{
    predict_energy, search_optimal_density, DensityBounds, DensityChoice, EnergyPrediction,
    LevelGrid, Probe, SearchConfig, Termination, DEFAULT_LEVELS,
};

use serde::{Deserialize, Serialize};

use crate::coverage::{PathCycle, PlanError};
use crate::geometry::{GeometryError, SloiSet};

#[derive(Debug, Clone, thiserror::Error)]
pub enum DensityError {
    #[error("invalid energy model: {0}")]
    InvalidModel(String),
    #[error("invalid density bounds [{d_min}, {d_max}]")]
    InvalidBounds { d_min: f64, d_max: f64 },
    #[error(
        "infeasible: even the sparsest density {d_max} needs energy {energy:.3} \
         for {count} samples, budget is {budget}"
    )]
    Infeasible {
        d_max: f64,
        energy: f64,
        count: usize,
        budget: f64,
    },
    #[error("planned mission uses {energy:.6} energy, over the budget {budget}")]
    BudgetExceeded { energy: f64, budget: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Linear travel cost plus a fixed cost per measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Energy per unit travel length, `kappa`.
    pub travel_cost: f64,
    /// Energy per measurement stop, `e_M`.
    pub measure_cost: f64,
    /// Total energy available, `e_bdt`.
    pub budget: f64,
}

impl EnergyModel {
    pub fn new(travel_cost: f64, measure_cost: f64, budget: f64) -> Result<Self, DensityError> {
        let em = Self {
            travel_cost,
            measure_cost,
            budget,
        };
        em.validate()?;
        Ok(em)
    }

    /// Budget counted in length units: `kappa = 1`, one unit per measurement.
    pub fn length_budget(budget: f64) -> Result<Self, DensityError> {
        Self::new(1.0, 1.0, budget)
    }

    /// Quadrotor field preset: 81.3 Wh battery, about 20 min at 1 m/s, and
    /// 2 Wh per 10 s hover. Lengths in metres, energy in Wh.
    pub fn field_test_preset() -> Self {
        Self {
            travel_cost: 81.3 / 1200.0,
            measure_cost: 2.0,
            budget: 81.3,
        }
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !(self.travel_cost > 0.0 && self.travel_cost.is_finite()) {
            return Err(DensityError::InvalidModel(format!(
                "travel cost must be positive, got {}",
                self.travel_cost
            )));
        }
        if !(self.measure_cost >= 0.0 && self.measure_cost.is_finite()) {
            return Err(DensityError::InvalidModel(format!(
                "measurement cost must be non-negative, got {}",
                self.measure_cost
            )));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(DensityError::InvalidModel(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        Ok(())
    }

    /// Energy of one lattice step of length `d` followed by one measurement.
    pub fn per_sample(&self, d: f64) -> f64 {
        self.travel_cost * d + self.measure_cost
    }
}

/// `kappa * |p| + e_M * |SP|` for a closed path over `slois`.
pub fn path_energy(path: &PathCycle, slois: &SloiSet, em: &EnergyModel) -> f64 {
    let length = path.length(&slois.positions());
    em.travel_cost * length + em.measure_cost * path.len() as f64
}
