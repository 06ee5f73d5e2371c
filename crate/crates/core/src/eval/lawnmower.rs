use super::{Planner, SurveyPlan};
use crate::coverage::closed_length;
use crate::density::{
    DensityBounds, DensityError, EnergyModel, LevelGrid, LevelSearch, Probe, SearchConfig,
};
use crate::geometry::{Point2, Polygon};

/// Levels scanned on each side of the bisection result.
const REFINE_RADIUS: usize = 3;

/// Samples on a square lattice of spacing `t`, visited row by row in
/// alternating direction. Rows and columns start half a step inside the
/// bounding box.
pub fn lawnmower_samples(poly: &Polygon, t: f64) -> Vec<Point2> {
    let bb = poly.bbox();
    let rows = ((bb.height() - 0.5 * t) / t).floor().max(-1.0) as i64 + 1;
    let cols = ((bb.width() - 0.5 * t) / t).floor().max(-1.0) as i64 + 1;
    let mut out = Vec::new();
    for j in 0..rows {
        let y = bb.min.y + 0.5 * t + j as f64 * t;
        let mut row: Vec<Point2> = (0..cols)
            .map(|i| Point2::new(bb.min.x + 0.5 * t + i as f64 * t, y))
            .filter(|p| poly.contains(*p))
            .collect();
        if j % 2 == 1 {
            row.reverse();
        }
        out.extend(row);
    }
    out
}

/// `kappa * closed tour length + e_M * samples`.
pub fn tour_energy(waypoints: &[Point2], em: &EnergyModel) -> f64 {
    em.travel_cost * closed_length(waypoints) + em.measure_cost * waypoints.len() as f64
}

/// Back-and-forth transects with the spacing chosen by the density search:
/// bisection on the level grid, then a scan of the neighbouring levels.
pub fn baseline_lawnmower(
    poly: &Polygon,
    em: &EnergyModel,
    cfg: &SearchConfig,
) -> Result<SurveyPlan, DensityError> {
    em.validate()?;
    let bounds = DensityBounds::new(cfg.bounds.d_min, cfg.bounds.d_max)?;
    let levels = LevelGrid::new(bounds, cfg.levels);
    let mut search = LevelSearch::new(levels, em.budget, 3, |t: f64| {
        let pts = lawnmower_samples(poly, t);
        Ok(Probe {
            energy: tour_energy(&pts, em),
            count: pts.len(),
        })
    });
    let Some((k, _)) = search.bisect(cfg.delta)? else {
        return Err(search.infeasible()?);
    };
    let lo = k.saturating_sub(REFINE_RADIUS);
    let hi = (k + REFINE_RADIUS).min(levels.count - 1);
    let best = search.refine(Some(k), lo..=hi, |_, _| true)?.unwrap_or(k);
    let t = levels.density(best);
    let waypoints = lawnmower_samples(poly, t);
    let energy = tour_energy(&waypoints, em);
    Ok(SurveyPlan {
        planner: Planner::Lawnmower,
        density: t,
        edge_length: None,
        budget: em.budget,
        energy,
        candidate_count: waypoints.len(),
        sample_count: waypoints.len(),
        waypoints,
    })
}
