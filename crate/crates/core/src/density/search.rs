use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DensityError, EnergyModel};
use crate::geometry::{count_slois, hex_tessellate, Polygon};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Number of discrete density levels searched between the bounds.
pub const DEFAULT_LEVELS: usize = 10_000;

/// Inclusive range of lattice spacings `d = sqrt(3) * l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub d_min: f64,
    pub d_max: f64,
}

impl DensityBounds {
    pub fn new(d_min: f64, d_max: f64) -> Result<Self, DensityError> {
        if !(d_min > 0.0 && d_max > d_min && d_max.is_finite()) {
            return Err(DensityError::InvalidBounds { d_min, d_max });
        }
        Ok(Self { d_min, d_max })
    }

    /// `[2, min(width, height) / 4]` over the polygon's bounding box.
    pub fn for_polygon(poly: &Polygon) -> Result<Self, DensityError> {
        let bb = poly.bbox();
        Self::new(2.0, bb.width().min(bb.height()) / 4.0)
    }
}

/// Uniformly spaced densities `d_k = d_min + k (d_max - d_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelGrid {
    pub bounds: DensityBounds,
    pub count: usize,
}

impl LevelGrid {
    pub fn new(bounds: DensityBounds, count: usize) -> Self {
        Self {
            bounds,
            count: count.max(2),
        }
    }

    pub fn density(&self, k: usize) -> f64 {
        let DensityBounds { d_min, d_max } = self.bounds;
        if k + 1 == self.count {
            return d_max;
        }
        d_min + k as f64 * (d_max - d_min) / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub energy: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// A probe landed within `delta` below the budget.
    Delta,
    /// The bracket shrank to adjacent levels.
    Bracket,
    /// The densest level already fits the budget.
    Densest,
    /// Bisection found no feasible level; the bounded scan did.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub bounds: DensityBounds,
    pub delta: f64,
    pub levels: usize,
}

impl SearchConfig {
    pub fn new(bounds: DensityBounds, delta: f64) -> Self {
        Self {
            bounds,
            delta,
            levels: DEFAULT_LEVELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityChoice {
    pub level: usize,
    pub density: f64,
    pub edge_length: f64,
    pub energy: f64,
    pub count: usize,
    pub termination: Termination,
    /// Distinct levels evaluated.
    pub evaluations: usize,
}

/// Predicted cost of covering every SLoI at edge length `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPrediction {
    pub energy: f64,
    pub count: usize,
}

impl EnergyPrediction {
    /// A closed cycle needs at least three SLoIs.
    pub fn is_feasible(&self) -> bool {
        self.count >= 3
    }
}

/// Energy of a closed lattice cycle through `count` nodes at spacing `d`. A
/// single stop has no travel leg.
pub(crate) fn cycle_energy(em: &EnergyModel, d: f64, count: usize) -> f64 {
    let travel = if count >= 2 {
        em.travel_cost * d * count as f64
    } else {
        0.0
    };
    travel + em.measure_cost * count as f64
}

/// `(kappa * sqrt(3) * l + e_M) * |SL|`, assuming every SLoI is visited.
pub fn predict_energy(
    l: f64,
    poly: &Polygon,
    em: &EnergyModel,
) -> Result<EnergyPrediction, DensityError> {
    let grid = hex_tessellate(poly, l)?;
    let count = count_slois(&grid, poly);
    Ok(EnergyPrediction {
        energy: cycle_energy(em, SQRT3 * l, count),
        count,
    })
}

/// Memoized level search shared by all planners.
pub(crate) struct LevelSearch<F> {
    pub levels: LevelGrid,
    pub budget: f64,
    pub min_count: usize,
    probe: F,
    cache: BTreeMap<usize, Probe>,
}

impl<F: FnMut(f64) -> Result<Probe, DensityError>> LevelSearch<F> {
    pub fn new(levels: LevelGrid, budget: f64, min_count: usize, probe: F) -> Self {
        Self {
            levels,
            budget,
            min_count,
            probe,
            cache: BTreeMap::new(),
        }
    }

    pub fn eval(&mut self, k: usize) -> Result<Probe, DensityError> {
        if let Some(p) = self.cache.get(&k) {
            return Ok(*p);
        }
        let p = (self.probe)(self.levels.density(k))?;
        self.cache.insert(k, p);
        Ok(p)
    }

    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }

    pub fn feasible(&self, p: &Probe) -> bool {
        p.count >= self.min_count && p.energy <= self.budget
    }

    /// More samples wins; equal counts prefer the energy closer to the budget.
    pub fn better(a: &Probe, b: &Probe) -> bool {
        a.count > b.count || (a.count == b.count && a.energy > b.energy)
    }

    /// Bisects for the densest feasible level, treating energy as decreasing
    /// and the count as non-increasing in `d`. Returns the feasible level and
    /// how the search stopped, or `None` if no bisection probe fit.
    pub fn bisect(&mut self, delta: f64) -> Result<Option<(usize, Termination)>, DensityError> {
        let mut top = self.levels.count - 1;
        if self.eval(top)?.count < self.min_count {
            // Sparsest level with enough samples for a cycle.
            let (mut lo, mut hi) = (0, top);
            if self.eval(0)?.count < self.min_count {
                return Ok(None);
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.eval(mid)?.count >= self.min_count {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            top = lo;
        }
        let sparse = self.eval(top)?;
        if !self.feasible(&sparse) {
            return Ok(None);
        }
        if self.budget - sparse.energy <= delta {
            return Ok(Some((top, Termination::Delta)));
        }
        let dense = self.eval(0)?;
        if self.feasible(&dense) {
            return Ok(Some((0, Termination::Densest)));
        }
        let (mut lo, mut hi) = (0, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let p = self.eval(mid)?;
            if self.feasible(&p) {
                hi = mid;
                if self.budget - p.energy <= delta {
                    return Ok(Some((mid, Termination::Delta)));
                }
            } else {
                lo = mid;
            }
        }
        Ok(Some((hi, Termination::Bracket)))
    }

    /// Scans `ks`, keeping the best feasible level. `admit` can rule a level
    /// out without probing it, given the current best count and energy.
    pub fn refine(
        &mut self,
        best: Option<usize>,
        ks: impl IntoIterator<Item = usize>,
        mut admit: impl FnMut(usize, Option<&Probe>) -> bool,
    ) -> Result<Option<usize>, DensityError> {
        let mut best = match best {
            Some(k) => Some((k, self.eval(k)?)),
            None => None,
        };
        for k in ks {
            if best.is_some_and(|(b, _)| b == k) || !admit(k, best.as_ref().map(|(_, p)| p)) {
                continue;
            }
            let p = self.eval(k)?;
            if self.feasible(&p) && best.is_none_or(|(_, b)| Self::better(&p, &b)) {
                best = Some((k, p));
            }
        }
        Ok(best.map(|(k, _)| k))
    }

    pub fn infeasible(&mut self) -> Result<DensityError, DensityError> {
        let top = self.levels.count - 1;
        let p = self.eval(top)?;
        Ok(DensityError::Infeasible {
            d_max: self.levels.bounds.d_max,
            energy: p.energy,
            count: p.count,
            budget: self.budget,
        })
    }
}

/// Certified lower bound on the SLoI count at edge length `l`.
///
/// Hexagons whose centroids lie inside cover the polygon eroded by the
/// circumradius `l`. The strip removed by erosion is at most one `l`-wide
/// band per edge plus a wedge of angle below pi at each reflex vertex.
fn count_lower_bound(poly: &Polygon, l: f64) -> f64 {
    let n = poly.vertices().len() as f64;
    let perimeter: f64 = poly.edges().map(|(a, b)| a.dist(&b)).sum();
    let eroded = poly.area() - perimeter * l - n * 0.5 * std::f64::consts::PI * l * l;
    (eroded / (1.5 * SQRT3 * l * l)).max(0.0)
}

/// Maximizes `|SL|` over the level grid subject to the predicted energy
/// fitting the budget. A bisection locates the budget boundary; a bounded
/// scan then visits every level that could still beat it.
pub fn search_optimal_density(
    poly: &Polygon,
    em: &EnergyModel,
    cfg: &SearchConfig,
) -> Result<DensityChoice, DensityError> {
    search_with_overhead(poly, em, cfg, |_| Ok(0.0))
}

/// As [`search_optimal_density`] with an extra, non-negative energy term per
/// edge length (for example transit legs).
pub(crate) fn search_with_overhead(
    poly: &Polygon,
    em: &EnergyModel,
    cfg: &SearchConfig,
    mut overhead: impl FnMut(f64) -> Result<f64, DensityError>,
) -> Result<DensityChoice, DensityError> {
    em.validate()?;
    let bounds = DensityBounds::new(cfg.bounds.d_min, cfg.bounds.d_max)?;
    let levels = LevelGrid::new(bounds, cfg.levels);
    let mut search = LevelSearch::new(levels, em.budget, 3, |d: f64| {
        let l = d / SQRT3;
        let pred = predict_energy(l, poly, em)?;
        Ok(Probe {
            energy: pred.energy + overhead(l)?,
            count: pred.count,
        })
    });
    let bisected = search.bisect(cfg.delta)?;
    let budget = em.budget;
    let best = search.refine(bisected.map(|(k, _)| k), 0..levels.count, |k, best| {
        let d = levels.density(k);
        let unit = em.per_sample(d);
        let cap = (budget / unit).floor();
        if cap < best.map_or(3, |b| b.count) as f64 {
            return false;
        }
        unit * count_lower_bound(poly, d / SQRT3) <= budget
    })?;
    let Some(best) = best else {
        return Err(search.infeasible()?);
    };
    let termination = bisected.map_or(Termination::Scan, |(_, t)| t);
    let p = search.eval(best)?;
    let density = levels.density(best);
    Ok(DensityChoice {
        level: best,
        density,
        edge_length: density / SQRT3,
        energy: p.energy,
        count: p.count,
        termination,
        evaluations: search.evaluations(),
    })
}
