use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

const SQRT5: f64 = 2.236_067_977_499_79;

/// Matérn 5/2 hyperparameters plus a relative diagonal boost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Process standard deviation.
    pub sigma: f64,
    /// Length scale.
    pub rho: f64,
    /// Diagonal boost, relative to `sigma^2`.
    pub jitter: f64,
}

impl Hyperparameters {
    pub fn new(sigma: f64, rho: f64) -> Self {
        Self {
            sigma,
            rho,
            jitter: super::DEFAULT_JITTER,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.sigma > 0.0
            && self.sigma.is_finite()
            && self.rho > 0.0
            && self.rho.is_finite()
            && self.jitter >= 0.0
            && self.jitter.is_finite()
    }
}

/// `sigma^2 (1 + r + r^2/3) exp(-r)` with `r = sqrt(5) h / rho`.
pub fn matern52_lag(h: f64, sigma: f64, rho: f64) -> f64 {
    let r = SQRT5 * h / rho;
    sigma * sigma * (1.0 + r + r * r / 3.0) * (-r).exp()
}

pub fn matern52(si: Point2, sj: Point2, theta: &Hyperparameters) -> f64 {
    matern52_lag(si.dist(&sj), theta.sigma, theta.rho)
}

/// Derivative of [`matern52_lag`] with respect to `ln rho`.
pub(crate) fn matern52_dlog_rho(h: f64, sigma: f64, rho: f64) -> f64 {
    let r = SQRT5 * h / rho;
    sigma * sigma * r * r * (1.0 + r) / 3.0 * (-r).exp()
}
