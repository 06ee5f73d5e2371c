use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EvalError, FieldRaster};
use crate::field::{matern52_lag, Hyperparameters, Monomial};
use crate::geometry::Point2;

/// Largest grid drawn by dense factorization.
pub const MAX_SYNTHETIC_NODES: usize = 10_000;

/// Polynomial trend `sum c_k * m_k(s)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub terms: Vec<(Monomial, f64)>,
}

impl Trend {
    pub fn eval(&self, p: Point2) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(p)).sum()
    }
}

/// Draws a zero-mean Matérn 5/2 GP on an `nx` x `ny` node grid and adds `trend`.
pub fn gen_synthetic_field(
    nx: usize,
    ny: usize,
    cell_size: f64,
    origin: Point2,
    theta: &Hyperparameters,
    trend: &Trend,
    seed: u64,
) -> Result<FieldRaster, EvalError> {
    if !theta.is_valid() {
        return Err(EvalError::InvalidConfig(format!(
            "hyperparameters sigma {} rho {}",
            theta.sigma, theta.rho
        )));
    }
    let n = nx.saturating_mul(ny);
    if n > MAX_SYNTHETIC_NODES {
        return Err(EvalError::GridTooLarge {
            nodes: n,
            max: MAX_SYNTHETIC_NODES,
        });
    }
    let shell = FieldRaster::new(nx, ny, cell_size, origin, vec![0.0; n])?;
    let nodes = shell.nodes();
    let s2 = theta.sigma * theta.sigma;
    let mut jitter = theta.jitter.max(crate::field::DEFAULT_JITTER);
    let l = loop {
        let c = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                s2 * (1.0 + jitter)
            } else {
                matern52_lag(nodes[i].dist(&nodes[j]), theta.sigma, theta.rho)
            }
        });
        if let Some(ch) = Cholesky::new(c) {
            break ch.unpack();
        }
        jitter *= 10.0;
        if jitter > crate::field::MAX_JITTER {
            return Err(EvalError::InvalidConfig(format!(
                "grid covariance is not positive definite (sigma {}, rho {})",
                theta.sigma, theta.rho
            )));
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let g = l * z;
    let values = nodes
        .iter()
        .zip(g.iter())
        .map(|(p, v)| v + trend.eval(*p))
        .collect();
    FieldRaster::new(nx, ny, cell_size, origin, values)
}
