use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{EvalError, FieldRaster};
use crate::field::Observations;
use crate::geometry::Point2;

/// Reads the raster at each waypoint (bilinear) and adds N(0, noise_sd^2) noise.
pub fn sample_field(
    raster: &FieldRaster,
    waypoints: &[Point2],
    noise_sd: f64,
    seed: u64,
) -> Result<Observations, EvalError> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(EvalError::InvalidConfig(format!("noise sd {noise_sd}")));
    }
    let mut values = Vec::with_capacity(waypoints.len());
    let mut outside = Vec::new();
    for (k, p) in waypoints.iter().enumerate() {
        match raster.bilinear(*p) {
            Some(v) => values.push(v),
            None => outside.push(k),
        }
    }
    if !outside.is_empty() {
        return Err(EvalError::OutsideRaster(outside));
    }
    if noise_sd > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sd).expect("valid sd");
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(Observations::new(waypoints.to_vec(), values)?)
}
