//! `hexsurvey`: plan coverage-sampling missions, map fields from samples,
//! run budget sweeps and score prediction rasters.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hexsurvey::density::{plan_mission, DensityError, MissionConfig};
use hexsurvey::eval::{
    akv, fit_model, interpolation_nodes, predict_grid, rmse, run_experiment, CellStatus, EvalError,
    ExperimentConfig, FieldRaster, ModelConfig, Planner, TrendMode,
};
use hexsurvey::field::{FieldError, MleConfig};
use hexsurvey::geometry::{Point2, Polygon};
use hexsurvey::io::{self, IoError};

#[derive(Parser)]
#[command(
    name = "hexsurvey",
    version,
    about = "Energy-budgeted hexagonal survey planning and Kriging field maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a coverage mission over a contour under an energy budget.
    Plan(PlanArgs),
    /// Fit a Kriging model to samples and write mean and variance rasters.
    Map(MapArgs),
    /// Run a planner x budget sweep from a config file.
    Simulate(SimulateArgs),
    /// Score a prediction raster against a truth raster.
    Eval(EvalArgs),
}

/// Energy-model and density-search settings shared by `plan` and `simulate`.
/// Each flag overrides the config file value.
#[derive(Args, Default)]
struct MissionFlags {
    /// Flat TOML experiment config supplying defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Energy per unit travel length.
    #[arg(long)]
    travel_cost: Option<f64>,
    /// Energy per measurement.
    #[arg(long)]
    measure_cost: Option<f64>,
    /// Accept the bisection once the energy is within this of the budget.
    #[arg(long)]
    delta: Option<f64>,
    /// Smallest sampling density (spacing between samples).
    #[arg(long)]
    d_min: Option<f64>,
    /// Largest sampling density.
    #[arg(long)]
    d_max: Option<f64>,
    /// Number of density levels searched.
    #[arg(long)]
    levels: Option<usize>,
    /// Home position x; defaults to the contour's lower-left corner.
    #[arg(long, requires = "start_y")]
    start_x: Option<f64>,
    #[arg(long, requires = "start_x")]
    start_y: Option<f64>,
    /// Charge the legs between home and the cycle against the budget.
    #[arg(long)]
    include_transit: bool,
}

#[derive(Args)]
struct PlanArgs {
    /// Contour as GeoJSON or `x,y` CSV.
    #[arg(long)]
    contour: PathBuf,
    /// Energy budget.
    #[arg(long)]
    budget: f64,
    #[command(flatten)]
    mission: MissionFlags,
    /// Output directory for mission.json, path.geojson and path.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrendArg {
    Universal,
    Blind,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum RasterFormat {
    Asc,
    Csv,
}

#[derive(Args)]
struct MapArgs {
    /// Samples as `x,y,value` CSV.
    #[arg(long)]
    samples: PathBuf,
    /// Contour as GeoJSON or `x,y` CSV; nodes outside it are written as no-data.
    #[arg(long)]
    contour: PathBuf,
    /// Node spacing of the output grid, anchored at the contour's lower-left corner.
    #[arg(long, default_value_t = 1.0, conflicts_with = "grid_from")]
    cell_size: f64,
    /// Copy the node grid of this raster instead.
    #[arg(long)]
    grid_from: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "universal")]
    trend: TrendArg,
    /// Polynomial degree of the universal trend.
    #[arg(long, default_value_t = 1)]
    trend_degree: u8,
    /// Seed of the likelihood multi-start.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "asc")]
    format: RasterFormat,
    /// Output directory for mean, variance and model.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    mission: MissionFlags,
    /// Budgets to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<f64>>,
    /// Planners to run, comma separated (hgc, lawnmower, tsp).
    #[arg(long, value_delimiter = ',')]
    planners: Option<Vec<String>>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    contour: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Keep raster nodes next to samples in the scored set.
    #[arg(long)]
    include_sampled: bool,
    /// Also write per-cell wall-clock times to runtime.json.
    #[arg(long)]
    timings: bool,
    /// Output directory; defaults to the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted mean raster (`.asc` or CSV).
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Prediction variance raster; adds the average variance.
    #[arg(long)]
    variance: Option<PathBuf>,
    /// Restrict scoring to nodes inside this contour.
    #[arg(long)]
    contour: Option<PathBuf>,
    /// Drop nodes within half a cell of these `x,y,value` samples.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Write the metrics JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit 1 for unreadable or malformed input and failed writes, exit 2 for
/// infeasible or invalid requests.
enum CliError {
    Io(String),
    Domain(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_validation() {
            CliError::Domain(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Map(a) => cmd_map(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s.into_bytes()
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    Ok(io::write_atomic(path, bytes)?)
}

fn base_config(flags: &MissionFlags) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(p) => io::load_experiment_config(p)?,
        None => ExperimentConfig::default(),
    };
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut cfg.travel_cost, flags.travel_cost);
    set(&mut cfg.measure_cost, flags.measure_cost);
    set(&mut cfg.delta, flags.delta);
    cfg.d_min = flags.d_min.or(cfg.d_min);
    cfg.d_max = flags.d_max.or(cfg.d_max);
    cfg.levels = flags.levels.unwrap_or(cfg.levels);
    if flags.start_x.is_some() {
        cfg.start_x = flags.start_x;
        cfg.start_y = flags.start_y;
    }
    cfg.include_transit |= flags.include_transit;
    Ok(cfg)
}

fn cmd_plan(a: PlanArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&a.mission)?;
    cfg.budgets = vec![a.budget];
    cfg.validate()?;
    let contour = io::read_polygon(&a.contour)?;
    let em = cfg.energy_model(a.budget)?;
    let mcfg = MissionConfig {
        include_transit: cfg.include_transit,
        ..MissionConfig::new(cfg.search_config(&contour)?)
    };
    let mission = plan_mission(&contour, &em, cfg.start(&contour), &mcfg)?;
    if !mission.is_complete() {
        eprintln!(
            "warning: {} sampling locations could not be placed on the cycle",
            mission.report.unvisited.len()
        );
    }
    write(&a.out.join("mission.json"), &to_json(&mission))?;
    write(
        &a.out.join("path.geojson"),
        io::path_geojson(&mission.waypoints).as_bytes(),
    )?;
    write(
        &a.out.join("path.csv"),
        io::path_csv(&mission.waypoints).as_bytes(),
    )?;
    Ok(())
}

fn grid_over(contour: &Polygon, cell: f64) -> Result<FieldRaster, CliError> {
    if !(cell > 0.0 && cell.is_finite()) {
        return Err(CliError::Domain(format!(
            "cell size {cell} must be positive"
        )));
    }
    let bb = contour.bbox();
    let nx = (bb.width() / cell).floor() as usize + 1;
    let ny = (bb.height() / cell).floor() as usize + 1;
    if nx.saturating_mul(ny) > hexsurvey::eval::MAX_RASTER_NODES {
        return Err(CliError::Domain(format!(
            "a {nx}x{ny} grid is too large; raise --cell-size"
        )));
    }
    Ok(FieldRaster::new(
        nx.max(2),
        ny.max(2),
        cell,
        bb.min,
        vec![0.0; nx.max(2) * ny.max(2)],
    )?)
}

fn write_raster(
    dir: &Path,
    name: &str,
    r: &FieldRaster,
    format: RasterFormat,
) -> Result<(), CliError> {
    match format {
        RasterFormat::Asc => write(
            &dir.join(format!("{name}.asc")),
            io::write_esri_ascii(r).as_bytes(),
        ),
        RasterFormat::Csv => write(
            &dir.join(format!("{name}.csv")),
            io::write_raster_csv(r).as_bytes(),
        ),
    }
}

fn cmd_map(a: MapArgs) -> Result<(), CliError> {
    let obs = io::read_observations(&a.samples)?;
    if obs.len() < 3 {
        return Err(CliError::Domain(format!(
            "need at least 3 samples, got {}",
            obs.len()
        )));
    }
    let contour = io::read_polygon(&a.contour)?;
    let template = match &a.grid_from {
        Some(p) => io::read_raster(p)?,
        None => grid_over(&contour, a.cell_size)?,
    };
    let cfg = ModelConfig {
        trend_mode: match a.trend {
            TrendArg::Universal => TrendMode::Universal,
            TrendArg::Blind => TrendMode::Blind,
        },
        trend_degree: a.trend_degree,
        mle: MleConfig {
            seed: a.seed,
            ..MleConfig::default()
        },
    };
    let model = fit_model(&obs, &cfg)?;
    let maps = predict_grid(&model, &contour, &template)?;
    if maps.clamped > 0 {
        eprintln!(
            "warning: clamped {} negative variances to zero",
            maps.clamped
        );
    }
    write_raster(&a.out, "mean", &maps.mean, a.format)?;
    write_raster(&a.out, "variance", &maps.variance, a.format)?;
    write(&a.out.join("model.json"), &to_json(&model.summary()))?;
    Ok(())
}

#[derive(Serialize)]
struct CellTiming {
    planner: Planner,
    budget: f64,
    runtime_s: f64,
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&a.mission)?;
    if let Some(b) = a.budgets {
        cfg.budgets = b;
    }
    if let Some(p) = a.planners {
        cfg.planners = p
            .iter()
            .map(|s| s.parse::<Planner>().map_err(CliError::Domain))
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = a.noise_sd {
        cfg.noise_sd = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.contour.is_some() {
        cfg.contour = a.contour;
    }
    if a.truth.is_some() {
        cfg.truth = a.truth;
    }
    if a.include_sampled {
        cfg.exclude_sampled = false;
    }
    cfg.validate()?;
    let out = a.out.or_else(|| cfg.output_dir.clone()).ok_or_else(|| {
        CliError::Domain("no output directory: pass --out or set output_dir".into())
    })?;
    let truth = match &cfg.truth {
        Some(p) => io::read_raster(p)?,
        None => cfg.synthetic_truth()?,
    };
    let contour = match &cfg.contour {
        Some(p) => io::read_polygon(p)?,
        None => truth.extent(),
    };
    let result = run_experiment(&contour, &truth, &cfg)?;

    if cfg.truth.is_none() {
        write(
            &out.join("truth.asc"),
            io::write_esri_ascii(&truth).as_bytes(),
        )?;
    }
    for cell in &result.cells {
        let r = &cell.report;
        let dir = out
            .join("cells")
            .join(format!("{}-{}", r.planner.name(), r.budget));
        if let Some(plan) = &cell.plan {
            write(
                &dir.join("path.csv"),
                io::path_csv(&plan.waypoints).as_bytes(),
            )?;
            write(
                &dir.join("path.geojson"),
                io::path_geojson(&plan.waypoints).as_bytes(),
            )?;
        }
        if let Some(s) = &cell.score {
            write(
                &dir.join("mean.csv"),
                io::write_raster_csv(&s.mean).as_bytes(),
            )?;
            write(
                &dir.join("variance.csv"),
                io::write_raster_csv(&s.variance).as_bytes(),
            )?;
            write(&dir.join("model.json"), &to_json(&s.model))?;
        }
        if r.status != CellStatus::Ok {
            eprintln!(
                "{} at budget {}: {}",
                r.planner.name(),
                r.budget,
                r.error.as_deref().unwrap_or("failed")
            );
        }
    }
    write(&out.join("metrics.json"), &to_json(&result.reports()))?;
    if a.timings {
        let t: Vec<CellTiming> = result
            .cells
            .iter()
            .map(|c| CellTiming {
                planner: c.report.planner,
                budget: c.report.budget,
                runtime_s: c.runtime.as_secs_f64(),
            })
            .collect();
        write(&out.join("runtime.json"), &to_json(&t))?;
    }
    if result.all_failed() {
        return Err(CliError::Domain("every experiment cell failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    e_rms: f64,
    akv: Option<f64>,
    nodes: usize,
}

fn same_grid(a: &FieldRaster, b: &FieldRaster) -> bool {
    (a.nx(), a.ny(), a.cell_size(), a.origin()) == (b.nx(), b.ny(), b.cell_size(), b.origin())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let pred = io::read_raster(&a.pred)?;
    let truth = io::read_raster(&a.truth)?;
    let variance = a.variance.as_deref().map(io::read_raster).transpose()?;
    if !same_grid(&pred, &truth) || variance.as_ref().is_some_and(|v| !same_grid(v, &truth)) {
        return Err(CliError::Domain(
            "rasters do not share the same node grid".into(),
        ));
    }
    let contour = match &a.contour {
        Some(p) => io::read_polygon(p)?,
        None => truth.extent(),
    };
    let samples: Vec<Point2> = match &a.samples {
        Some(p) => io::read_observations(p)?.locations().to_vec(),
        None => Vec::new(),
    };
    let nodes: Vec<usize> = interpolation_nodes(&contour, &truth, &samples, !samples.is_empty())
        .into_iter()
        .filter(|&k| pred.values()[k].is_finite())
        .collect();
    let pick = |r: &FieldRaster| nodes.iter().map(|&k| r.values()[k]).collect::<Vec<f64>>();
    let report = EvalReport {
        e_rms: rmse(&pick(&pred), &pick(&truth))?,
        akv: variance.as_ref().map(|v| akv(&pick(v))).transpose()?,
        nodes: nodes.len(),
    };
    let json = to_json(&report);
    match &a.out {
        Some(p) => write(p, &json),
        None => {
            print!("{}", String::from_utf8_lossy(&json));
            Ok(())
        }
    }
}
