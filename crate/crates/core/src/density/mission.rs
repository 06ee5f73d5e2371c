use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::search::{
    cycle_energy, search_with_overhead, DensityChoice, LevelGrid, SearchConfig, Termination,
};
use super::{path_energy, DensityError, EnergyModel};
use crate::coverage::{plan_coverage_with, CycleReport, PathCycle, PlannerOptions};
use crate::geometry::{
    acc_decompose, build_adjacency, count_slois, hex_tessellate, select_slois, Point2, Polygon,
};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    pub search: SearchConfig,
    pub planner: PlannerOptions,
    /// Charge the legs from `start` to the cycle and back against the budget.
    pub include_transit: bool,
    pub max_retries: usize,
}

impl MissionConfig {
    pub fn new(search: SearchConfig) -> Self {
        Self {
            search,
            planner: PlannerOptions::default(),
            include_transit: false,
            max_retries: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub travel: f64,
    pub measurement: f64,
    pub transit: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub edge_length: f64,
    pub density: f64,
    pub budget: f64,
    pub predicted_energy: f64,
    pub energy: EnergyBreakdown,
    /// `|SL|` at the chosen density.
    pub sloi_count: usize,
    /// `|SP|`, the SLoIs actually on the cycle.
    pub visited_count: usize,
    pub termination: Termination,
    pub retries: usize,
    pub path: PathCycle,
    pub waypoints: Vec<Point2>,
    pub report: CycleReport,
}

impl Mission {
    pub fn is_complete(&self) -> bool {
        self.report.is_complete()
    }
}

fn transit_energy(em: &EnergyModel, start: Point2, first: Option<Point2>) -> f64 {
    first.map_or(0.0, |p| 2.0 * em.travel_cost * start.dist(&p))
}

/// Chooses the density, builds the coverage cycle and audits its energy.
///
/// If the audited energy exceeds the budget the density is coarsened one level
/// at a time, up to `max_retries` times. SLoIs the planner cannot reach are
/// listed in `report.unvisited` rather than failing the mission.
pub fn plan_mission(
    poly: &Polygon,
    em: &EnergyModel,
    start: Point2,
    cfg: &MissionConfig,
) -> Result<Mission, DensityError> {
    let choice = search_with_overhead(poly, em, &cfg.search, |l| {
        if !cfg.include_transit {
            return Ok(0.0);
        }
        let grid = hex_tessellate(poly, l)?;
        let slois = select_slois(&grid, poly);
        Ok(transit_energy(
            em,
            start,
            slois.nearest(start).map(|k| slois.position(k)),
        ))
    })?;
    let levels = LevelGrid::new(cfg.search.bounds, cfg.search.levels);
    let mut level = choice.level;
    let mut last = None;
    for retry in 0..=cfg.max_retries {
        let d = levels.density(level);
        let mission = build(poly, em, start, cfg, d, &choice, retry)?;
        if mission.energy.total <= em.budget {
            if mission.is_complete() || em.budget - mission.energy.total <= cfg.search.delta {
                return Ok(mission);
            }
            return densify(poly, em, start, cfg, &levels, level, &choice, mission);
        }
        warn!(
            "mission at d={d} uses {} of budget {}; coarsening",
            mission.energy.total, em.budget
        );
        last = Some(mission.energy.total);
        if level + 1 >= levels.count {
            break;
        }
        level += 1;
    }
    Err(DensityError::BudgetExceeded {
        energy: last.unwrap_or(f64::NAN),
        budget: em.budget,
    })
}

/// Distinct SLoI counts probed by [`densify`].
const DENSIFY_PROBES: usize = 64;
/// Consecutive over-budget probes after which [`densify`] stops.
const DENSIFY_PATIENCE: usize = 3;

/// A partial mission can fall well short of the budget because the energy
/// prediction counts SLoIs the cycle cannot reach. Walks to denser levels,
/// building a mission at each new SLoI count, and keeps the in-budget one
/// with the most visited SLoIs (ties go to higher energy).
#[allow(clippy::too_many_arguments)]
fn densify(
    poly: &Polygon,
    em: &EnergyModel,
    start: Point2,
    cfg: &MissionConfig,
    levels: &LevelGrid,
    level: usize,
    choice: &DensityChoice,
    mut best: Mission,
) -> Result<Mission, DensityError> {
    let mut last_count = best.sloi_count;
    let (mut probes, mut misses) = (0, 0);
    for k in (0..level).rev() {
        if probes == DENSIFY_PROBES || misses == DENSIFY_PATIENCE {
            break;
        }
        let d = levels.density(k);
        let grid = hex_tessellate(poly, d / SQRT3)?;
        let count = count_slois(&grid, poly);
        if count == last_count {
            continue;
        }
        last_count = count;
        probes += 1;
        let m = match build(poly, em, start, cfg, d, choice, 0) {
            Ok(m) => m,
            Err(DensityError::Plan(_)) => continue,
            Err(e) => return Err(e),
        };
        if m.energy.total > em.budget {
            misses += 1;
            continue;
        }
        misses = 0;
        if (m.visited_count, m.energy.total) > (best.visited_count, best.energy.total) {
            best = m;
        }
        if em.budget - best.energy.total <= cfg.search.delta {
            break;
        }
    }
    debug!(
        "densified partial mission to d={} ({} visited, energy {})",
        best.density, best.visited_count, best.energy.total
    );
    Ok(best)
}

fn build(
    poly: &Polygon,
    em: &EnergyModel,
    start: Point2,
    cfg: &MissionConfig,
    density: f64,
    choice: &DensityChoice,
    retries: usize,
) -> Result<Mission, DensityError> {
    let l = density / SQRT3;
    let grid = hex_tessellate(poly, l)?;
    let slois = select_slois(&grid, poly);
    let acc = acc_decompose(&grid, &slois);
    let graph = build_adjacency(&slois, &grid);
    let outcome = plan_coverage_with(&acc, &slois, &graph, start, cfg.planner)?;
    if !outcome.report.unvisited.is_empty() {
        debug!(
            "{} of {} SLoIs unreachable at d={density}",
            outcome.report.unvisited.len(),
            slois.len()
        );
    }
    let waypoints = outcome.cycle.waypoints(&slois.positions());
    let total_path = path_energy(&outcome.cycle, &slois, em);
    let measurement = em.measure_cost * outcome.cycle.len() as f64;
    let transit = if cfg.include_transit {
        transit_energy(em, start, waypoints.first().copied())
    } else {
        0.0
    };
    let predicted = cycle_energy(em, density, slois.len())
        + if cfg.include_transit {
            transit_energy(em, start, slois.nearest(start).map(|k| slois.position(k)))
        } else {
            0.0
        };
    Ok(Mission {
        edge_length: l,
        density,
        budget: em.budget,
        predicted_energy: predicted,
        energy: EnergyBreakdown {
            travel: total_path - measurement,
            measurement,
            transit,
            total: total_path + transit,
        },
        sloi_count: slois.len(),
        visited_count: outcome.report.visited_count,
        termination: choice.termination,
        retries,
        path: outcome.cycle,
        waypoints,
        report: outcome.report,
    })
}
