//! Universal Kriging with a Matérn 5/2 covariance: GLS trend estimation,
//! maximum-likelihood hyperparameters, blind trend selection and prediction.

mod basis;
mod kernel;
mod mle;
mod model;
mod optim;
mod select;

pub use basis::{quadratic_candidates, Monomial, TrendBasis};
pub use kernel::{matern52, matern52_lag, Hyperparameters};
pub use mle::{fit_mle, MleConfig, MleFit, MleStart, SearchBounds};
pub use model::{KrigingModel, ModelSummary, Prediction, PredictionSet};
pub use optim::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use select::{
    select_trend, select_trend_with, LooRmse, SelectionConfig, SelectionStep, TrendScore,
    TrendSelection,
};

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// Default diagonal boost, relative to `sigma^2`.
pub const DEFAULT_JITTER: f64 = 1e-10;
/// Largest jitter tried when the covariance fails to factorize.
pub const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("observations need at least one sample")]
    Empty,
    #[error("{locations} locations but {values} values")]
    LengthMismatch { locations: usize, values: usize },
    #[error("sample {0} has a non-finite coordinate or value")]
    NonFinite(usize),
    #[error("samples {0} and {1} share a location")]
    DuplicateLocation(usize, usize),
    #[error("invalid hyperparameters: sigma {sigma}, rho {rho}, jitter {jitter}")]
    InvalidHyperparameters { sigma: f64, rho: f64, jitter: f64 },
    #[error(
        "covariance is not positive definite even with jitter {jitter:e}; \
         try a larger jitter or remove near-duplicate samples"
    )]
    Factorization { jitter: f64 },
    #[error("trend term {term} is collinear with {with:?} at these samples")]
    RankDeficient { term: String, with: Vec<String> },
    #[error("{samples} samples cannot support {terms} trend terms (need at least {needed})")]
    TooFewObservations {
        samples: usize,
        terms: usize,
        needed: usize,
    },
    #[error("observed values are constant; the process variance has no positive estimate")]
    Degenerate,
}

/// Sample locations and readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservations", into = "RawObservations")]
pub struct Observations {
    locations: Vec<Point2>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawObservations {
    locations: Vec<Point2>,
    values: Vec<f64>,
}

impl TryFrom<RawObservations> for Observations {
    type Error = FieldError;

    fn try_from(raw: RawObservations) -> Result<Self, FieldError> {
        Observations::new(raw.locations, raw.values)
    }
}

impl From<Observations> for RawObservations {
    fn from(o: Observations) -> Self {
        Self {
            locations: o.locations,
            values: o.values,
        }
    }
}

impl Observations {
    pub fn new(locations: Vec<Point2>, values: Vec<f64>) -> Result<Self, FieldError> {
        if locations.len() != values.len() {
            return Err(FieldError::LengthMismatch {
                locations: locations.len(),
                values: values.len(),
            });
        }
        if locations.is_empty() {
            return Err(FieldError::Empty);
        }
        if let Some(i) =
            (0..values.len()).find(|&i| !locations[i].is_finite() || !values[i].is_finite())
        {
            return Err(FieldError::NonFinite(i));
        }
        let mut order: Vec<usize> = (0..locations.len()).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (locations[a], locations[b]);
            p.x.total_cmp(&q.x)
                .then(p.y.total_cmp(&q.y))
                .then(a.cmp(&b))
        });
        for w in order.windows(2) {
            if locations[w[0]] == locations[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(FieldError::DuplicateLocation(a, b));
            }
        }
        Ok(Self { locations, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn locations(&self) -> &[Point2] {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same locations with every value mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            locations: self.locations.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sample standard deviation (`n - 1` denominator); zero for a single sample.
    pub fn value_sd(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let p = &self.locations;
        let mut best = f64::INFINITY;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                best = best.min(p[i].dist(&p[j]));
            }
        }
        best
    }

    pub fn diameter(&self) -> f64 {
        let p = &self.locations;
        let mut best: f64 = 0.0;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                best = best.max(p[i].dist(&p[j]));
            }
        }
        best
    }
}
