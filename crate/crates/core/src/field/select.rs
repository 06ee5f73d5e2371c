use serde::{Deserialize, Serialize};

use super::{
    fit_mle, FieldError, Hyperparameters, KrigingModel, MleConfig, Monomial, Observations,
    TrendBasis,
};

/// Scores a fitted model; lower is better.
pub trait TrendScore {
    fn score(&self, model: &KrigingModel) -> f64;
}

/// Leave-one-out root-mean-square error with the hyperparameters held fixed.
#[derive(Debug, Clone, Copy, Default)]
pub struct LooRmse;

impl TrendScore for LooRmse {
    fn score(&self, model: &KrigingModel) -> f64 {
        let r = model.loo_residuals();
        (r.iter().map(|e| e * e).sum::<f64>() / r.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Most candidates to add.
    pub max_terms: usize,
    /// Stop when the best addition improves the score by less than this fraction.
    pub min_improvement: f64,
    /// Re-estimate the hyperparameters for every candidate basis instead of
    /// reusing those of the constant-trend fit.
    pub refit: bool,
    pub mle: MleConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            max_terms: 5,
            min_improvement: 0.01,
            refit: true,
            mle: MleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub added: Monomial,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSelection {
    pub basis: TrendBasis,
    /// Hyperparameters of the constant-trend fit.
    pub theta: Option<Hyperparameters>,
    /// Score of the constant-only model.
    pub base_score: Option<f64>,
    pub steps: Vec<SelectionStep>,
    /// Set when too few samples forced the constant basis.
    pub fell_back: bool,
}

impl TrendSelection {
    fn constant_only() -> Self {
        Self {
            basis: TrendBasis::constant(),
            theta: None,
            base_score: None,
            steps: Vec::new(),
            fell_back: true,
        }
    }
}

/// Greedy forward selection by leave-one-out RMSE.
pub fn select_trend(
    obs: &Observations,
    candidates: &[Monomial],
    cfg: &SelectionConfig,
) -> Result<TrendSelection, FieldError> {
    select_trend_with(obs, candidates, cfg, &LooRmse)
}

/// Greedy forward selection from `{1}`. Each candidate basis is refit by
/// maximum likelihood before scoring; with `refit` off, the hyperparameters of
/// the constant-trend fit are reused for every candidate.
pub fn select_trend_with(
    obs: &Observations,
    candidates: &[Monomial],
    cfg: &SelectionConfig,
    scorer: &dyn TrendScore,
) -> Result<TrendSelection, FieldError> {
    let mut basis = TrendBasis::constant();
    if candidates.is_empty() {
        return Ok(TrendSelection {
            fell_back: false,
            ..TrendSelection::constant_only()
        });
    }
    if obs.len() < basis.len() + 2 {
        log::warn!(
            "{} samples are too few for leave-one-out trend selection; using a constant trend",
            obs.len()
        );
        return Ok(TrendSelection::constant_only());
    }
    let theta = fit_mle(obs, &basis, &cfg.mle)?.theta;
    let mut current = scorer.score(&KrigingModel::fit(obs, &basis, theta)?);
    let base_score = current;
    let mut pool: Vec<Monomial> = candidates
        .iter()
        .copied()
        .filter(|m| *m != Monomial::CONSTANT)
        .collect();
    pool.dedup();
    let mut steps = Vec::new();
    while steps.len() < cfg.max_terms && !pool.is_empty() && obs.len() >= basis.len() + 3 {
        let mut best: Option<(usize, f64)> = None;
        for (k, &m) in pool.iter().enumerate() {
            let trial = basis.with(m);
            let fitted = if cfg.refit {
                fit_mle(obs, &trial, &cfg.mle).and_then(|f| KrigingModel::fit(obs, &trial, f.theta))
            } else {
                KrigingModel::fit(obs, &trial, theta)
            };
            let score = match fitted {
                Ok(model) => scorer.score(&model),
                Err(FieldError::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            };
            if score.is_finite() && best.is_none_or(|(_, s)| score < s) {
                best = Some((k, score));
            }
        }
        let Some((k, score)) = best else { break };
        if current - score < cfg.min_improvement * current {
            break;
        }
        let added = pool.remove(k);
        basis = basis.with(added);
        current = score;
        steps.push(SelectionStep { added, score });
    }
    Ok(TrendSelection {
        basis,
        theta: Some(theta),
        base_score: Some(base_score),
        steps,
        fell_back: false,
    })
}
