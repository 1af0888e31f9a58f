use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares power law `δφ ≈ prefactor · N^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Euclidean norm of the residuals of `ln δφ`.
    pub residual_norm: f64,
}

/// Fits a straight line to `(ln N, ln δφ)` and reports minus its slope.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(n, d)) = points.iter().find(|(n, d)| !(*n > 0.0 && *d > 0.0)) {
        return Err(Error::NonPositive(n, d));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, d)| (n.ln(), d.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("power-law fit needs at least two distinct N".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_norm = logs.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>().sqrt();
    Ok(ScalingFit { exponent: -slope, prefactor: intercept.exp(), residual_norm })
}
