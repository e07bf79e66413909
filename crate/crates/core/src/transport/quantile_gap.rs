//! Quantile gaps against the standard normal controlled by `K_p`.
//!
//! For a centered `Z` with `E Z² ≤ 2` and
//! `K_p = ∫₀¹ |F_Z^{-1}(t) − Φ^{-1}(t)|^p dt`, every `u ∈ (0, 1/2]` satisfies
//!
//! ```text
//! |F_Z^{-1}(1−u) − Φ^{-1}(1−u)| ≤ max( ((p+1) e K_p / (u Q_{1,Y}(u)))^{1/(p+1)},
//!                                       ((p+1) e K_p / u)^{1/p} )
//! ```
//!
//! where `Q_{1,Y}` is the standard-normal superquantile.

use serde::Serialize;
use std::f64::consts::E;

use crate::error::{domain, Error, Result};
use crate::gaussian::{normal_quantile, superquantile};

use super::cost::gaussian_cost;
use super::dist::{Atoms, LatticeDist};

/// Tolerance on the moment hypotheses `E Z = 0`, `E Z² ≤ 2`.
pub const MOMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileGapReport {
    pub u: f64,
    /// `|F_Z^{-1}(1−u) − Φ^{-1}(1−u)|`
    pub lhs: f64,
    pub rhs: f64,
    pub p: u32,
    pub k_p: f64,
    pub violated: bool,
}

fn check_moments(z: &impl Atoms) -> Result<()> {
    let mean = z.mean();
    if mean.abs() > MOMENT_TOL {
        return Err(Error::Precondition(format!("E Z = {mean:e}, expected 0 (tol {MOMENT_TOL:e})")));
    }
    let m2 = z.second_moment();
    if m2 > 2.0 + MOMENT_TOL {
        return Err(Error::Precondition(format!("E Z^2 = {m2}, must be <= 2")));
    }
    Ok(())
}

/// `K_p = ∫₀¹ |F_Z^{-1}(t) − Φ^{-1}(t)|^p dt` after checking the moment hypotheses.
pub fn kp_integral(z: &impl Atoms, p: u32) -> Result<f64> {
    if p == 0 {
        return domain("K_p needs p >= 1");
    }
    check_moments(z)?;
    gaussian_cost(&z.atoms(), 1.0, p)
}

/// Right-hand side of the quantile-gap inequality.
pub fn quantile_gap_bound(k_p: f64, u: f64, p: u32) -> Result<f64> {
    if !(u > 0.0 && u <= 0.5) {
        return domain(format!("quantile gap bound needs u in (0, 1/2], got {u}"));
    }
    if p == 0 {
        return domain("quantile gap bound needs p >= 1");
    }
    if !(k_p >= 0.0) {
        return domain(format!("K_p must be nonnegative, got {k_p}"));
    }
    let scale = (p as f64 + 1.0) * E * k_p;
    let q1 = superquantile(u)?;
    let first = (scale / (u * q1)).powf(1.0 / (p as f64 + 1.0));
    let second = (scale / u).powf(1.0 / p as f64);
    Ok(first.max(second))
}

/// Evaluates both sides of the inequality on a grid of tail levels.
pub fn verify_prop_quantile(z: &LatticeDist, u_grid: &[f64], p: u32) -> Result<Vec<QuantileGapReport>> {
    let k_p = kp_integral(z, p)?;
    u_grid
        .iter()
        .map(|&u| {
            let rhs = quantile_gap_bound(k_p, u, p)?;
            let lhs = (z.upper_quantile(u) + normal_quantile(u)?).abs(); // Φ^{-1}(1−u) = −Φ^{-1}(u)
            Ok(QuantileGapReport { u, lhs, rhs, p, k_p, violated: lhs > rhs })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        assert_eq!(quantile_gap_bound(0.0, 0.25, 2).unwrap(), 0.0);
        assert!(quantile_gap_bound(1.0, 0.0, 2).is_err());
        assert!(quantile_gap_bound(1.0, 0.51, 2).is_err());
        // direct evaluation: Q_{1,Y}(1/4) = φ(Φ^{-1}(1/4))/(1/4)
        let k = 0.40423;
        let q1 = 4.0 * (-0.5f64 * 0.674_489_750_196_081_7f64.powi(2)).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let a = (3.0 * E * k / (0.25 * q1)).powf(1.0 / 3.0);
        let b = (3.0 * E * k / 0.25).sqrt();
        assert!((quantile_gap_bound(k, 0.25, 2).unwrap() - a.max(b)).abs() < 1e-12);
    }

    #[test]
    fn bound_monotone_in_kp() {
        let mut k = 1e-6;
        let mut prev = 0.0;
        while k < 10.0 {
            let v = quantile_gap_bound(k, 0.1, 1).unwrap();
            assert!(v >= prev);
            prev = v;
            k *= 2.0;
        }
    }

    #[test]
    fn rademacher_k2() {
        let k2 = kp_integral(&LatticeDist::rademacher(), 2).unwrap();
        assert!((k2 - (2.0 - 2.0 * (2.0 / std::f64::consts::PI).sqrt())).abs() < 1e-9);
    }

    #[test]
    fn moment_preconditions_reported() {
        let shifted = LatticeDist::rademacher().shifted(0.1);
        match kp_integral(&shifted, 2) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("E Z")),
            other => panic!("expected precondition error, got {other:?}"),
        }
        let wide = LatticeDist::new(-1.5, 3.0, vec![0.5, 0.5]).unwrap();
        assert!(matches!(kp_integral(&wide, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn rademacher_never_violates() {
        let grid: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        let reports = verify_prop_quantile(&LatticeDist::rademacher(), &grid, 2).unwrap();
        assert_eq!(reports.len(), 10);
        assert!(reports.iter().all(|r| !r.violated && r.lhs <= r.rhs));
    }

    #[test]
    fn asymmetric_two_point_variance_two() {
        // values a < 0 < b with mean 0 and variance 2: p b + (1-p) a = 0, p b² + (1-p) a² = 2
        let (a, b) = (-0.5f64, 4.0f64);
        let p = -a / (b - a);
        let var = p * b * b + (1.0 - p) * a * a;
        let scale = (2.0 / var).sqrt();
        let (a, b) = (a * scale, b * scale);
        let step = b - a;
        let z = LatticeDist::new(a, step, vec![1.0 - p, p]).unwrap();
        assert!(z.mean().abs() < 1e-12);
        assert!((z.second_moment() - 2.0).abs() < 1e-12);
        let grid: Vec<f64> = (1..=50).map(|i| 0.01 * i as f64).collect();
        for r in verify_prop_quantile(&z, &grid, 2).unwrap() {
            assert!(!r.violated, "u={} lhs={} rhs={}", r.u, r.lhs, r.rhs);
        }
    }
}
