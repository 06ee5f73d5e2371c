use super::EvalError;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Root-mean-square error over pairs where both values are finite.
pub fn rmse(predictions: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    let sq: Vec<f64> = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.is_finite() && t.is_finite())
        .map(|(p, t)| (p - t) * (p - t))
        .collect();
    if sq.is_empty() {
        return Err(EvalError::EmptyNodeSet);
    }
    Ok((compensated_sum(sq.iter().copied()) / sq.len() as f64).sqrt())
}

/// Average Kriging variance over finite entries.
pub fn akv(variances: &[f64]) -> Result<f64, EvalError> {
    let v: Vec<f64> = variances
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if v.is_empty() {
        return Err(EvalError::EmptyNodeSet);
    }
    if let Some(bad) = v.iter().find(|x| **x < 0.0) {
        return Err(EvalError::NegativeVariance(*bad));
    }
    Ok(compensated_sum(v.iter().copied()) / v.len() as f64)
}
