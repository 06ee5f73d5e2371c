use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    akv, baseline_lawnmower, gen_synthetic_field, plan_tsp_mission, rmse, sample_field, EvalError,
    FieldRaster, Planner, SurveyPlan, Trend,
};
use crate::density::{
    plan_mission, DensityBounds, EnergyModel, MissionConfig, SearchConfig, DEFAULT_LEVELS,
};
use crate::field::{
    fit_mle, quadratic_candidates, select_trend, Hyperparameters, KrigingModel, MleConfig,
    ModelSummary, Observations, SelectionConfig, TrendBasis,
};
use crate::geometry::{Point2, Polygon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendMode {
    /// Full polynomial of `trend_degree`.
    Universal,
    /// Forward selection from the quadratic candidates.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub trend_mode: TrendMode,
    pub trend_degree: u8,
    pub mle: MleConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            trend_mode: TrendMode::Universal,
            trend_degree: 1,
            mle: MleConfig::default(),
        }
    }
}

/// One flat document describing a budget sweep. Paths are resolved by the
/// caller; [`run_experiment`] takes the loaded contour and truth raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Contour file (GeoJSON or CSV). Defaults to the raster extent.
    pub contour: Option<PathBuf>,
    /// Truth raster (`.asc` or CSV). Without it a synthetic field is drawn.
    pub truth: Option<PathBuf>,
    pub synthetic_nx: usize,
    pub synthetic_ny: usize,
    pub synthetic_cell_size: f64,
    pub synthetic_sigma: f64,
    pub synthetic_rho: f64,
    pub output_dir: Option<PathBuf>,
    pub budgets: Vec<f64>,
    pub planners: Vec<Planner>,
    pub travel_cost: f64,
    pub measure_cost: f64,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub delta: f64,
    pub levels: usize,
    pub start_x: Option<f64>,
    pub start_y: Option<f64>,
    pub include_transit: bool,
    pub noise_sd: f64,
    pub trend_mode: TrendMode,
    pub trend_degree: u8,
    /// Drop raster nodes within half a cell of a sample from the scored set.
    pub exclude_sampled: bool,
    pub tsp_timeout_s: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            contour: None,
            truth: None,
            synthetic_nx: 51,
            synthetic_ny: 56,
            synthetic_cell_size: 1.0,
            synthetic_sigma: 1.0,
            synthetic_rho: 8.0,
            output_dir: None,
            budgets: vec![400.0, 500.0, 600.0, 700.0, 800.0],
            planners: vec![Planner::Hgc, Planner::Lawnmower],
            travel_cost: 1.0,
            measure_cost: 1.0,
            d_min: None,
            d_max: None,
            delta: 20.0,
            levels: DEFAULT_LEVELS,
            start_x: None,
            start_y: None,
            include_transit: false,
            noise_sd: 0.0,
            trend_mode: TrendMode::Universal,
            trend_degree: 1,
            exclude_sampled: true,
            tsp_timeout_s: 900.0,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidConfig(m));
        if self.budgets.is_empty() {
            return bad("budgets must not be empty".into());
        }
        if let Some(b) = self.budgets.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return bad(format!("budget {b} must be positive"));
        }
        if self.planners.is_empty() {
            return bad("planners must not be empty".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("noise_sd {}", self.noise_sd));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta {}", self.delta));
        }
        if self.levels < 2 {
            return bad(format!("levels {} must be at least 2", self.levels));
        }
        if !(self.tsp_timeout_s > 0.0) {
            return bad(format!("tsp_timeout_s {}", self.tsp_timeout_s));
        }
        if self.start_x.is_some() != self.start_y.is_some() {
            return bad("start_x and start_y must be given together".into());
        }
        self.energy_model(1.0)?;
        Ok(())
    }

    pub fn energy_model(&self, budget: f64) -> Result<EnergyModel, EvalError> {
        Ok(EnergyModel::new(
            self.travel_cost,
            self.measure_cost,
            budget,
        )?)
    }

    pub fn search_config(&self, contour: &Polygon) -> Result<SearchConfig, EvalError> {
        let auto = DensityBounds::for_polygon(contour)?;
        let bounds = DensityBounds::new(
            self.d_min.unwrap_or(auto.d_min),
            self.d_max.unwrap_or(auto.d_max),
        )?;
        Ok(SearchConfig {
            bounds,
            delta: self.delta,
            levels: self.levels,
        })
    }

    pub fn model_config(&self, seed: u64) -> ModelConfig {
        ModelConfig {
            trend_mode: self.trend_mode,
            trend_degree: self.trend_degree,
            mle: MleConfig {
                seed,
                ..MleConfig::default()
            },
        }
    }

    /// Zero-mean Matérn field on the `synthetic_*` grid, drawn from its own
    /// stream of `seed`.
    pub fn synthetic_truth(&self) -> Result<FieldRaster, EvalError> {
        let theta = Hyperparameters::new(self.synthetic_sigma, self.synthetic_rho);
        gen_synthetic_field(
            self.synthetic_nx,
            self.synthetic_ny,
            self.synthetic_cell_size,
            Point2::new(0.0, 0.0),
            &theta,
            &Trend::default(),
            cell_seed(self.seed, u64::MAX),
        )
    }

    pub fn start(&self, contour: &Polygon) -> Point2 {
        match (self.start_x, self.start_y) {
            (Some(x), Some(y)) => Point2::new(x, y),
            _ => contour.bbox().min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
    /// Planner gave up (TSP time limit).
    NotAvailable,
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub planner: Planner,
    pub budget: f64,
    /// Hexagon edge length `l*` (lattice planners).
    pub edge_length: Option<f64>,
    pub density: Option<f64>,
    pub candidate_count: Option<usize>,
    pub sample_count: Option<usize>,
    pub energy: Option<f64>,
    pub e_rms: Option<f64>,
    pub akv: Option<f64>,
    /// Size of the scored node set.
    pub nodes: Option<usize>,
    pub clamped: Option<usize>,
    pub status: CellStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldScore {
    pub e_rms: f64,
    pub akv: f64,
    pub nodes: usize,
    pub clamped: usize,
    pub model: ModelSummary,
    /// Predictions at raster nodes inside the contour, NaN elsewhere.
    pub mean: FieldRaster,
    pub variance: FieldRaster,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub report: MetricsReport,
    pub runtime: Duration,
    pub plan: Option<SurveyPlan>,
    pub score: Option<FieldScore>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn reports(&self) -> Vec<MetricsReport> {
        self.cells.iter().map(|c| c.report.clone()).collect()
    }

    pub fn all_failed(&self) -> bool {
        self.cells.iter().all(|c| c.report.status != CellStatus::Ok)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent RNG seed for experiment cell `index`.
pub fn cell_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Raster nodes scored for a sample set: inside the contour, with finite
/// truth, and (when `exclude_sampled`) not within half a cell of a sample.
pub fn interpolation_nodes(
    contour: &Polygon,
    truth: &FieldRaster,
    samples: &[Point2],
    exclude_sampled: bool,
) -> Vec<usize> {
    let half = 0.5 * truth.cell_size();
    truth
        .nodes()
        .iter()
        .enumerate()
        .filter(|(k, p)| truth.values()[*k].is_finite() && contour.contains(**p))
        .filter(|(_, p)| !exclude_sampled || samples.iter().all(|s| s.dist(p) >= half))
        .map(|(k, _)| k)
        .collect()
}

fn choose_basis(obs: &Observations, cfg: &ModelConfig) -> Result<TrendBasis, EvalError> {
    let basis = match cfg.trend_mode {
        TrendMode::Universal => TrendBasis::polynomial(cfg.trend_degree),
        TrendMode::Blind => {
            let sel = SelectionConfig {
                mle: cfg.mle,
                ..SelectionConfig::default()
            };
            select_trend(obs, &quadratic_candidates(), &sel)?.basis
        }
    };
    if obs.len() < basis.len() + 2 {
        log::warn!(
            "{} samples cannot support {} trend terms; using a constant trend",
            obs.len(),
            basis.len()
        );
        return Ok(TrendBasis::constant());
    }
    Ok(basis)
}

/// Chooses the trend basis, fits hyperparameters by MLE and factorizes the model.
///
/// Constant samples have no likelihood optimum; they get a constant trend and
/// a process standard deviation of `1e-9 * max(|y|, 1)`, so the mean map is
/// flat and the variance vanishes.
pub fn fit_model(obs: &Observations, cfg: &ModelConfig) -> Result<KrigingModel, EvalError> {
    if obs.len() >= 2 && obs.value_sd() == 0.0 {
        let scale = obs.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        log::warn!("sample values are constant; fitting a flat map");
        let theta = Hyperparameters::new(1e-9 * scale, obs.diameter());
        return Ok(KrigingModel::fit(obs, &TrendBasis::constant(), theta)?);
    }
    let basis = choose_basis(obs, cfg)?;
    let fit = fit_mle(obs, &basis, &cfg.mle)?;
    Ok(KrigingModel::fit(obs, &basis, fit.theta)?)
}

/// Prediction mean and variance maps on the node grid of `template`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrediction {
    /// NaN at nodes outside the contour.
    pub mean: FieldRaster,
    pub variance: FieldRaster,
    pub clamped: usize,
}

pub fn predict_grid(
    model: &KrigingModel,
    contour: &Polygon,
    template: &FieldRaster,
) -> Result<GridPrediction, EvalError> {
    let nodes = template.nodes();
    let inside: Vec<usize> = (0..nodes.len())
        .filter(|&k| contour.contains(nodes[k]))
        .collect();
    let pts: Vec<Point2> = inside.iter().map(|&k| nodes[k]).collect();
    let preds = model.predict_batch(&pts);
    let mut mean = vec![f64::NAN; nodes.len()];
    let mut var = vec![f64::NAN; nodes.len()];
    for (k, p) in inside.iter().zip(&preds.predictions) {
        mean[*k] = p.mean;
        var[*k] = p.variance;
    }
    let raster = |values| {
        FieldRaster::new(
            template.nx(),
            template.ny(),
            template.cell_size(),
            template.origin(),
            values,
        )
    };
    Ok(GridPrediction {
        mean: raster(mean)?,
        variance: raster(var)?,
        clamped: preds.clamped,
    })
}

/// Fits a model to `obs`, predicts over the truth grid and scores it.
pub fn score_observations(
    contour: &Polygon,
    truth: &FieldRaster,
    obs: &Observations,
    cfg: &ModelConfig,
    exclude_sampled: bool,
) -> Result<FieldScore, EvalError> {
    let model = fit_model(obs, cfg)?;
    let maps = predict_grid(&model, contour, truth)?;
    let scored = interpolation_nodes(contour, truth, obs.locations(), exclude_sampled);
    let pick = |v: &[f64]| scored.iter().map(|&k| v[k]).collect::<Vec<f64>>();
    let e_rms = rmse(&pick(maps.mean.values()), &pick(truth.values()))?;
    let akv = akv(&pick(maps.variance.values()))?;
    Ok(FieldScore {
        e_rms,
        akv,
        nodes: scored.len(),
        clamped: maps.clamped,
        model: model.summary(),
        mean: maps.mean,
        variance: maps.variance,
    })
}

/// Plans one survey with `planner` under `budget`.
pub fn plan_survey(
    planner: Planner,
    contour: &Polygon,
    cfg: &ExperimentConfig,
    budget: f64,
) -> Result<SurveyPlan, EvalError> {
    let em = cfg.energy_model(budget)?;
    let search = cfg.search_config(contour)?;
    let start = cfg.start(contour);
    match planner {
        Planner::Hgc => {
            let mcfg = MissionConfig {
                include_transit: cfg.include_transit,
                ..MissionConfig::new(search)
            };
            let m = plan_mission(contour, &em, start, &mcfg)?;
            Ok(SurveyPlan {
                planner,
                density: m.density,
                edge_length: Some(m.edge_length),
                budget,
                energy: m.energy.total,
                candidate_count: m.sloi_count,
                sample_count: m.visited_count,
                waypoints: m.waypoints,
            })
        }
        Planner::Tsp => plan_tsp_mission(
            contour,
            &em,
            &search,
            start,
            Some(Duration::from_secs_f64(cfg.tsp_timeout_s)),
        ),
        Planner::Lawnmower => Ok(baseline_lawnmower(contour, &em, &search)?),
    }
}

fn run_cell(
    contour: &Polygon,
    truth: &FieldRaster,
    cfg: &ExperimentConfig,
    planner: Planner,
    budget: f64,
    seed: u64,
) -> CellResult {
    let t0 = Instant::now();
    let mut report = MetricsReport {
        planner,
        budget,
        edge_length: None,
        density: None,
        candidate_count: None,
        sample_count: None,
        energy: None,
        e_rms: None,
        akv: None,
        nodes: None,
        clamped: None,
        status: CellStatus::Ok,
        error: None,
    };
    let plan = match plan_survey(planner, contour, cfg, budget) {
        Ok(p) => p,
        Err(e) => {
            report.status = match e {
                EvalError::TimedOut => CellStatus::NotAvailable,
                _ => CellStatus::Failed,
            };
            report.error = Some(e.to_string());
            return CellResult {
                report,
                runtime: t0.elapsed(),
                plan: None,
                score: None,
            };
        }
    };
    report.edge_length = plan.edge_length;
    report.density = Some(plan.density);
    report.candidate_count = Some(plan.candidate_count);
    report.sample_count = Some(plan.sample_count);
    report.energy = Some(plan.energy);
    let scored = sample_field(truth, &plan.waypoints, cfg.noise_sd, seed).and_then(|obs| {
        score_observations(
            contour,
            truth,
            &obs,
            &cfg.model_config(seed),
            cfg.exclude_sampled,
        )
    });
    let score = match scored {
        Ok(s) => {
            report.e_rms = Some(s.e_rms);
            report.akv = Some(s.akv);
            report.nodes = Some(s.nodes);
            report.clamped = Some(s.clamped);
            Some(s)
        }
        Err(e) => {
            report.status = CellStatus::Failed;
            report.error = Some(e.to_string());
            None
        }
    };
    CellResult {
        report,
        runtime: t0.elapsed(),
        plan: Some(plan),
        score,
    }
}

/// Runs every (planner, budget) cell. Cells are independent, run in
/// parallel, and draw randomness only from their own [`cell_seed`]. Failures
/// are recorded in the cell's report.
pub fn run_experiment(
    contour: &Polygon,
    truth: &FieldRaster,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult, EvalError> {
    cfg.validate()?;
    let cells: Vec<(Planner, f64)> = cfg
        .planners
        .iter()
        .flat_map(|&p| cfg.budgets.iter().map(move |&b| (p, b)))
        .collect();
    let cells = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(planner, budget))| {
            run_cell(
                contour,
                truth,
                cfg,
                planner,
                budget,
                cell_seed(cfg.seed, k as u64),
            )
        })
        .collect();
    Ok(ExperimentResult { cells })
}
