use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{EvalError, Planner, SurveyPlan};
use crate::coverage::closed_length;
use crate::density::{search_optimal_density, DensityError, EnergyModel, SearchConfig};
use crate::geometry::{hex_tessellate, select_slois, Point2, Polygon, SloiSet};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Tours up to this size are solved exactly.
pub const EXACT_TSP_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TspOutcome {
    /// Visiting order (indices into the input), starting at the given start.
    Tour(Vec<usize>),
    TimedOut,
}

fn dist_matrix(pts: &[Point2]) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|a| pts.iter().map(|b| a.dist(b)).collect())
        .collect()
}

/// Closed tour over `pts`. Exact branch and bound up to [`EXACT_TSP_MAX`]
/// points, otherwise nearest neighbour from `start` improved by 2-opt until
/// no move shortens it.
pub fn solve_tsp(pts: &[Point2], start: usize, timeout: Option<Duration>) -> TspOutcome {
    let n = pts.len();
    if n <= 3 {
        let mut order: Vec<usize> = (0..n).collect();
        if n > 0 {
            order.rotate_left(start.min(n - 1));
        }
        return TspOutcome::Tour(order);
    }
    let deadline = timeout.map(|t| Instant::now() + t);
    let d = dist_matrix(pts);
    if n <= EXACT_TSP_MAX {
        return TspOutcome::Tour(exact(&d, start));
    }
    let mut tour = nearest_neighbour(&d, start);
    if two_opt(&d, &mut tour, deadline) {
        TspOutcome::Tour(tour)
    } else {
        TspOutcome::TimedOut
    }
}

pub fn tour_length(pts: &[Point2], order: &[usize]) -> f64 {
    let w: Vec<Point2> = order.iter().map(|&k| pts[k]).collect();
    closed_length(&w)
}

fn nearest_neighbour(d: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = d.len();
    let mut used = vec![false; n];
    let mut tour = vec![start];
    used[start] = true;
    let mut cur = start;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&k| !used[k])
            .min_by(|&a, &b| d[cur][a].total_cmp(&d[cur][b]))
            .expect("unvisited point remains");
        used[next] = true;
        tour.push(next);
        cur = next;
    }
    tour
}

/// First-improvement 2-opt. Returns false if the deadline passed.
fn two_opt(d: &[Vec<f64>], tour: &mut [usize], deadline: Option<Instant>) -> bool {
    let n = tour.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            if deadline.is_some_and(|t| Instant::now() > t) {
                return false;
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, e) = (tour[j], tour[(j + 1) % n]);
                let gain = d[a][b] + d[c][e] - d[a][c] - d[b][e];
                if gain > 1e-12 * (d[a][b] + d[c][e]) {
                    tour[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
    true
}

/// Depth-first branch and bound with the start fixed.
fn exact(d: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = d.len();
    let min_edge: Vec<f64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a)
                .map(|b| d[a][b])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut best = nearest_neighbour(d, start);
    let mut best_len = (0..n).map(|k| d[best[k]][best[(k + 1) % n]]).sum::<f64>();
    let mut path = vec![start];
    let mut used = vec![false; n];
    used[start] = true;

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        d: &[Vec<f64>],
        min_edge: &[f64],
        path: &mut Vec<usize>,
        used: &mut [bool],
        len: f64,
        best: &mut Vec<usize>,
        best_len: &mut f64,
    ) {
        let n = d.len();
        let last = *path.last().expect("non-empty path");
        if path.len() == n {
            let total = len + d[last][path[0]];
            if total < *best_len - 1e-12 {
                *best_len = total;
                best.clone_from(path);
            }
            return;
        }
        let bound: f64 = (0..n).filter(|&k| !used[k]).map(|k| min_edge[k]).sum();
        if len + bound >= *best_len - 1e-12 {
            return;
        }
        for k in 0..n {
            if used[k] {
                continue;
            }
            used[k] = true;
            path.push(k);
            dfs(d, min_edge, path, used, len + d[last][k], best, best_len);
            path.pop();
            used[k] = false;
        }
    }

    dfs(
        d,
        &min_edge,
        &mut path,
        &mut used,
        0.0,
        &mut best,
        &mut best_len,
    );
    best
}

/// TSP tour over every SLoI, starting from the one nearest `start`.
pub fn baseline_tsp(
    slois: &SloiSet,
    em: &EnergyModel,
    start: Point2,
    timeout: Option<Duration>,
) -> Result<SurveyPlan, EvalError> {
    let pts = slois.positions();
    if pts.len() < 3 {
        let e = crate::coverage::PlanError::TooFewSlois(pts.len());
        return Err(DensityError::from(e).into());
    }
    let first = slois.nearest(start).unwrap_or(0);
    let order = match solve_tsp(&pts, first, timeout) {
        TspOutcome::Tour(o) => o,
        TspOutcome::TimedOut => return Err(EvalError::TimedOut),
    };
    let waypoints: Vec<Point2> = order.iter().map(|&k| pts[k]).collect();
    let l = slois.grid().edge_length();
    Ok(SurveyPlan {
        planner: Planner::Tsp,
        density: SQRT3 * l,
        edge_length: Some(l),
        budget: em.budget,
        energy: super::tour_energy(&waypoints, em),
        candidate_count: pts.len(),
        sample_count: pts.len(),
        waypoints,
    })
}

/// Same density search as the coverage planner, with the tour built by
/// [`baseline_tsp`]. While the tour is over budget (at most 8 times) the
/// search is re-run against the budget scaled by `budget / energy`.
pub fn plan_tsp_mission(
    poly: &Polygon,
    em: &EnergyModel,
    cfg: &SearchConfig,
    start: Point2,
    timeout: Option<Duration>,
) -> Result<SurveyPlan, EvalError> {
    let mut target = *em;
    let mut energy = f64::NAN;
    for _ in 0..=8 {
        let choice = search_optimal_density(poly, &target, cfg)?;
        let grid = hex_tessellate(poly, choice.edge_length).map_err(DensityError::from)?;
        let slois = select_slois(&grid, poly);
        let mut plan = baseline_tsp(&slois, em, start, timeout)?;
        if plan.energy <= em.budget {
            plan.budget = em.budget;
            return Ok(plan);
        }
        energy = plan.energy;
        target.budget *= em.budget / plan.energy;
    }
    Err(DensityError::BudgetExceeded {
        energy,
        budget: em.budget,
    }
    .into())
}
