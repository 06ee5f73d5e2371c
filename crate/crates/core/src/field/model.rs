use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{matern52_dlog_rho, matern52_lag};
use super::{FieldError, Hyperparameters, Observations, TrendBasis, MAX_JITTER};
use crate::geometry::Point2;

/// Relative size below which a whitened trend column counts as dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub predictions: Vec<Prediction>,
    /// Number of negative variances clamped to zero.
    pub clamped: usize,
}

/// Serializable description of a fitted model. Factorizations are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub sigma: f64,
    pub rho: f64,
    pub jitter: f64,
    pub samples: usize,
    pub log_likelihood: f64,
}

/// A fitted universal Kriging model. Immutable once built.
///
/// Trend columns are rescaled to unit max-norm internally; `coefficients`
/// reports them in the original units.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    basis: TrendBasis,
    theta: Hyperparameters,
    obs: Observations,
    /// Lower Cholesky factor of `C + jitter * sigma^2 * I`.
    l: DMatrix<f64>,
    /// Thin QR of the whitened trend matrix `L^-1 F`.
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    scale: Vec<f64>,
    coef: DVector<f64>,
    /// Whitened residual `L^-1 (y - F a)`.
    white_resid: DVector<f64>,
    /// `C^-1 (y - F a)`.
    alpha: DVector<f64>,
    log_det: f64,
}

fn covariance(points: &[Point2], theta: &Hyperparameters, jitter: f64) -> DMatrix<f64> {
    let n = points.len();
    let s2 = theta.sigma * theta.sigma;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        c[(i, i)] = s2 * (1.0 + jitter);
        for j in 0..i {
            let v = matern52_lag(points[i].dist(&points[j]), theta.sigma, theta.rho);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Factorizes the covariance, escalating jitter tenfold up to [`MAX_JITTER`].
fn factorize(
    points: &[Point2],
    theta: &Hyperparameters,
) -> Result<(DMatrix<f64>, f64), FieldError> {
    let mut jitter = theta.jitter;
    loop {
        if let Some(ch) = Cholesky::new(covariance(points, theta, jitter)) {
            if jitter != theta.jitter {
                log::warn!("covariance factorized after raising jitter to {jitter:e}");
            }
            return Ok((ch.unpack(), jitter));
        }
        let next = if jitter == 0.0 {
            super::DEFAULT_JITTER
        } else {
            jitter * 10.0
        };
        if next > MAX_JITTER * (1.0 + 1e-9) {
            return Err(FieldError::Factorization { jitter });
        }
        jitter = next;
    }
}

impl KrigingModel {
    pub fn fit(
        obs: &Observations,
        basis: &TrendBasis,
        theta: Hyperparameters,
    ) -> Result<Self, FieldError> {
        if !theta.is_valid() {
            return Err(FieldError::InvalidHyperparameters {
                sigma: theta.sigma,
                rho: theta.rho,
                jitter: theta.jitter,
            });
        }
        let n = obs.len();
        let m = basis.len();
        if n < m {
            return Err(FieldError::TooFewObservations {
                samples: n,
                terms: m,
                needed: m,
            });
        }
        let (l, jitter) = factorize(obs.locations(), &theta)?;
        let theta = Hyperparameters { jitter, ..theta };

        let mut f = DMatrix::from_fn(n, m, |i, j| basis.terms()[j].eval(obs.locations()[i]));
        let mut scale = vec![1.0; m];
        for (j, s) in scale.iter_mut().enumerate() {
            let mx = f.column(j).amax();
            if mx > 0.0 {
                *s = 1.0 / mx;
                f.column_mut(j).scale_mut(*s);
            }
        }
        let y = DVector::from_column_slice(obs.values());
        let ft = l.solve_lower_triangular(&f).expect("nonsingular factor");
        let yt = l.solve_lower_triangular(&y).expect("nonsingular factor");

        let qr = ft.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        check_rank(&ft, &r, basis)?;
        let coef = r
            .solve_upper_triangular(&(q.transpose() * &yt))
            .expect("full-rank trend");
        let white_resid = &yt - &ft * &coef;
        let alpha = l
            .tr_solve_lower_triangular(&white_resid)
            .expect("nonsingular factor");
        let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            basis: basis.clone(),
            theta,
            obs: obs.clone(),
            l,
            q,
            r,
            scale,
            coef,
            white_resid,
            alpha,
            log_det,
        })
    }

    pub fn basis(&self) -> &TrendBasis {
        &self.basis
    }

    /// Hyperparameters with the jitter actually used.
    pub fn hyperparameters(&self) -> Hyperparameters {
        self.theta
    }

    pub fn observations(&self) -> &Observations {
        &self.obs
    }

    /// GLS trend coefficients `a`, one per basis term.
    pub fn coefficients(&self) -> Vec<f64> {
        self.coef
            .iter()
            .zip(&self.scale)
            .map(|(c, s)| c * s)
            .collect()
    }

    /// Norm of `F^T C^-1 (y - F a)` relative to `|F^T C^-1 y|`.
    pub fn gls_residual(&self) -> f64 {
        let ft = &self.q * &self.r;
        let g = ft.transpose() * &self.white_resid;
        let yt = &ft * &self.coef + &self.white_resid;
        let base = (ft.transpose() * yt).norm();
        if base == 0.0 {
            g.norm()
        } else {
            g.norm() / base
        }
    }

    /// Profile log-likelihood with `a` at its GLS estimate.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.obs.len() as f64;
        -0.5 * (self.white_resid.norm_squared()
            + self.log_det
            + n * (2.0 * std::f64::consts::PI).ln())
    }

    /// Gradient of [`Self::log_likelihood`] with respect to `(ln sigma, ln rho)`.
    pub fn log_likelihood_gradient(&self) -> [f64; 2] {
        let n = self.obs.len();
        let d_sigma = self.white_resid.norm_squared() - n as f64;
        let pts = self.obs.locations();
        let (sigma, rho) = (self.theta.sigma, self.theta.rho);
        let dc = DMatrix::from_fn(n, n, |i, j| {
            matern52_dlog_rho(pts[i].dist(&pts[j]), sigma, rho)
        });
        let quad = self.alpha.dot(&(&dc * &self.alpha));
        let x = self
            .l
            .solve_lower_triangular(&dc)
            .expect("nonsingular factor");
        let y = self
            .l
            .solve_lower_triangular(&x.transpose())
            .expect("nonsingular factor");
        [d_sigma, 0.5 * (quad - y.trace())]
    }

    fn trend_row(&self, p: Point2) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis
                .terms()
                .iter()
                .zip(&self.scale)
                .map(|(t, s)| t.eval(p) * s),
        )
    }

    /// Mean and unclamped variance at `p`.
    pub fn predict_raw(&self, p: Point2) -> Prediction {
        let pts = self.obs.locations();
        let c = DVector::from_iterator(
            pts.len(),
            pts.iter()
                .map(|s| matern52_lag(p.dist(s), self.theta.sigma, self.theta.rho)),
        );
        let f = self.trend_row(p);
        let v = self
            .l
            .solve_lower_triangular(&c)
            .expect("nonsingular factor");
        let mean = f.dot(&self.coef) + c.dot(&self.alpha);
        let m = &f - self.r.transpose() * (self.q.transpose() * &v);
        let w = self
            .r
            .tr_solve_upper_triangular(&m)
            .expect("full-rank trend");
        let variance = self.theta.sigma * self.theta.sigma - v.norm_squared() + w.norm_squared();
        Prediction { mean, variance }
    }

    /// Prediction with negative variance clamped to zero.
    pub fn predict(&self, p: Point2) -> Prediction {
        let mut pr = self.predict_raw(p);
        pr.variance = pr.variance.max(0.0);
        pr
    }

    /// Parallel prediction over many points.
    pub fn predict_batch(&self, points: &[Point2]) -> PredictionSet {
        let raw: Vec<Prediction> = points.par_iter().map(|&p| self.predict_raw(p)).collect();
        let clamped = raw.iter().filter(|p| p.variance < 0.0).count();
        if clamped > 0 {
            log::warn!("clamped {clamped} negative Kriging variances to zero");
        }
        let predictions = raw
            .into_iter()
            .map(|p| Prediction {
                mean: p.mean,
                variance: p.variance.max(0.0),
            })
            .collect();
        PredictionSet {
            predictions,
            clamped,
        }
    }

    /// Leave-one-out residuals `y_i - yhat_{-i}(s_i)` with fixed hyperparameters
    /// and the trend re-estimated without sample `i`.
    pub fn loo_residuals(&self) -> Vec<f64> {
        let n = self.obs.len();
        let linv = self
            .l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("nonsingular factor");
        let g = self
            .l
            .tr_solve_lower_triangular(&self.q)
            .expect("nonsingular factor");
        (0..n)
            .map(|i| {
                let cinv_ii = linv.column(i).norm_squared();
                let p_ii = cinv_ii - g.row(i).norm_squared();
                self.alpha[i] / p_ii
            })
            .collect()
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            terms: self.basis.names(),
            coefficients: self.coefficients(),
            sigma: self.theta.sigma,
            rho: self.theta.rho,
            jitter: self.theta.jitter,
            samples: self.obs.len(),
            log_likelihood: self.log_likelihood(),
        }
    }
}

/// Fails on the first whitened trend column that is (numerically) spanned by
/// the earlier ones, naming the terms it depends on.
fn check_rank(ft: &DMatrix<f64>, r: &DMatrix<f64>, basis: &TrendBasis) -> Result<(), FieldError> {
    for j in 0..r.ncols() {
        let col = ft.column(j).norm();
        if r[(j, j)].abs() > RANK_TOL * col && col > 0.0 {
            continue;
        }
        let names = basis.names();
        let mut with = Vec::new();
        if j > 0 && col > 0.0 {
            let head = r.view((0, 0), (j, j)).into_owned();
            let rhs = r.view((0, j), (j, 1)).into_owned();
            if let Some(x) = head.solve_upper_triangular(&rhs) {
                let mx = x.amax();
                for (k, v) in x.iter().enumerate() {
                    if v.abs() > 1e-8 * mx {
                        with.push(names[k].clone());
                    }
                }
            }
        }
        return Err(FieldError::RankDeficient {
            term: names[j].clone(),
            with,
        });
    }
    Ok(())
}

impl KrigingModel {
    /// `(r^T C^-1 r, ln |C|)`.
    pub(crate) fn log_likelihood_parts(&self) -> (f64, f64) {
        (self.white_resid.norm_squared(), self.log_det)
    }
}
