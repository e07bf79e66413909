//! Log–log rate fits.

use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub r2: f64,
    /// `(ln n, ln metric)`
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
    /// Two-sided 95% band on the slope.
    pub ci95: (f64, f64),
}

/// Student-t 0.975 quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
    2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// Ordinary least squares of `ln metric` on `ln n`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return domain(format!("rate fit needs at least 3 points, got {}", points.len()));
    }
    if points.iter().any(|&(n, m)| !(n > 0.0) || !(m > 0.0) || !m.is_finite()) {
        return domain("rate fit needs positive n and positive finite metrics");
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, se, r2, residuals) = crate::numeric::ols(&x, &y);
    let se = if se.is_finite() { se } else { 0.0 };
    let df = points.len() - 2;
    let t = if df <= 30 { T975[df - 1] } else { 1.96 };
    Ok(RateFit {
        slope,
        intercept,
        stderr_slope: se,
        r2,
        points: x.into_iter().zip(y).collect(),
        residuals,
        ci95: (slope - t * se, slope + t * se),
    })
}
