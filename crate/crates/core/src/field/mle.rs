use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{nelder_mead, NelderMeadOptions};
use super::{FieldError, Hyperparameters, KrigingModel, Observations, TrendBasis, DEFAULT_JITTER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub starts: usize,
    pub seed: u64,
    pub jitter: f64,
    pub max_evals: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            jitter: DEFAULT_JITTER,
            max_evals: 200,
        }
    }
}

/// Box for `(sigma, rho)`; the search runs in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub sigma: (f64, f64),
    pub rho: (f64, f64),
}

impl SearchBounds {
    /// `rho` in `[0.1 * min spacing, 2 * diameter]`, `sigma` in `[1e-3 sd, 10 sd]`.
    pub fn for_observations(obs: &Observations) -> Result<Self, FieldError> {
        let sd = obs.value_sd();
        if !(sd > 0.0) {
            return Err(FieldError::Degenerate);
        }
        Ok(Self {
            sigma: (1e-3 * sd, 10.0 * sd),
            rho: (0.1 * obs.min_pairwise_distance(), 2.0 * obs.diameter()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleStart {
    pub sigma0: f64,
    pub rho0: f64,
    pub log_likelihood0: f64,
    pub sigma: f64,
    pub rho: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub theta: Hyperparameters,
    pub log_likelihood: f64,
    /// `sigma` ended on its lower bound: the data leave no process variance.
    pub degenerate: bool,
    pub bounds: SearchBounds,
    pub starts: Vec<MleStart>,
    pub evaluations: usize,
}

/// Log-likelihood at `rho` with `sigma` at its closed-form optimum, clamped to
/// `sigma_bounds`. Returns `(loglik, sigma)`.
fn concentrated(
    obs: &Observations,
    basis: &TrendBasis,
    rho: f64,
    jitter: f64,
    sigma_bounds: (f64, f64),
) -> Result<(f64, f64), FieldError> {
    let unit = KrigingModel::fit(
        obs,
        basis,
        Hyperparameters::new(1.0, rho).with_jitter(jitter),
    )?;
    let n = obs.len() as f64;
    let q = unit.log_likelihood_parts();
    let sigma = (q.0 / n).sqrt().clamp(sigma_bounds.0, sigma_bounds.1);
    Ok((scaled_loglik(q, n, sigma), sigma))
}

fn scaled_loglik((quad, log_det): (f64, f64), n: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    -0.5 * (quad / s2 + log_det + n * s2.ln() + n * (2.0 * std::f64::consts::PI).ln())
}

/// Maximum-likelihood `(sigma, rho)` by multi-start bounded Nelder–Mead.
///
/// Starts are a Latin hypercube over the log box. From each start the search
/// runs over `ln rho` with `sigma` profiled out in closed form, so every
/// start's result is at least as likely as the start itself.
pub fn fit_mle(
    obs: &Observations,
    basis: &TrendBasis,
    cfg: &MleConfig,
) -> Result<MleFit, FieldError> {
    let needed = basis.len() + 2;
    if obs.len() < needed {
        return Err(FieldError::TooFewObservations {
            samples: obs.len(),
            terms: basis.len(),
            needed,
        });
    }
    let bounds = SearchBounds::for_observations(obs)?;
    let (ls, lr) = (
        (bounds.sigma.0.ln(), bounds.sigma.1.ln()),
        (bounds.rho.0.ln(), bounds.rho.1.ln()),
    );
    let starts = cfg.starts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let strata = |lo: f64, hi: f64, rng: &mut ChaCha8Rng| {
        let mut perm: Vec<usize> = (0..starts).collect();
        perm.shuffle(rng);
        perm.into_iter()
            .map(|k| lo + (k as f64 + rng.random::<f64>()) / starts as f64 * (hi - lo))
            .collect::<Vec<f64>>()
    };
    let s_starts = strata(ls.0, ls.1, &mut rng);
    let r_starts = strata(lr.0, lr.1, &mut rng);

    let opts = NelderMeadOptions {
        max_evals: cfg.max_evals,
        f_tol: 1e-10,
        x_tol: 1e-6,
        initial_step: 0.1,
    };
    let n = obs.len() as f64;
    let mut records = Vec::new();
    let mut evaluations = 0;
    let mut last_err = None;
    for (s0, r0) in s_starts.iter().zip(&r_starts) {
        let (sigma0, rho0) = (s0.exp(), r0.exp());
        let ll0 = match KrigingModel::fit(
            obs,
            basis,
            Hyperparameters::new(1.0, rho0).with_jitter(cfg.jitter),
        ) {
            Ok(m) => scaled_loglik(m.log_likelihood_parts(), n, sigma0),
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let mut objective =
            |x: &[f64]| match concentrated(obs, basis, x[0].exp(), cfg.jitter, bounds.sigma) {
                Ok((ll, _)) => -ll,
                Err(_) => f64::INFINITY,
            };
        let res = nelder_mead(&mut objective, &[*r0], &[lr.0], &[lr.1], opts);
        evaluations += res.evaluations + 1;
        let rho = res.x[0].exp();
        match concentrated(obs, basis, rho, cfg.jitter, bounds.sigma) {
            Ok((ll, sigma)) => records.push(MleStart {
                sigma0,
                rho0,
                log_likelihood0: ll0,
                sigma,
                rho,
                log_likelihood: ll,
            }),
            Err(e) => last_err = Some(e),
        }
    }
    let best = records
        .iter()
        .max_by(|a, b| a.log_likelihood.total_cmp(&b.log_likelihood))
        .copied();
    let Some(best) = best else {
        return Err(last_err.unwrap_or(FieldError::Factorization { jitter: cfg.jitter }));
    };
    let model = KrigingModel::fit(
        obs,
        basis,
        Hyperparameters::new(best.sigma, best.rho).with_jitter(cfg.jitter),
    )?;
    let degenerate = best.sigma <= bounds.sigma.0 * (1.0 + 1e-12);
    if degenerate {
        log::warn!(
            "process sigma hit its lower bound {:e}; fit is degenerate",
            bounds.sigma.0
        );
    }
    Ok(MleFit {
        theta: model.hyperparameters(),
        log_likelihood: model.log_likelihood(),
        degenerate,
        bounds,
        starts: records,
        evaluations,
    })
}
