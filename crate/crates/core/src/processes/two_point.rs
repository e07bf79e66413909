//! Comparison variables `Y = Z + B` with `Z ~ N(0, σ²/2)` and `B` two-valued,
//! matching `E Y = 0`, `E Y² = σ²`, `E Y³ = β₃`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::seed::{stream_rng, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointSpec {
    pub sigma2: f64,
    pub beta3: f64,
    /// Upper value `b₁ > 0`.
    pub b1: f64,
    /// Lower value `b₂ < 0`.
    pub b2: f64,
    /// `P(B = b₁)`.
    pub p_mass: f64,
}

/// Roots of `x² − s x − v` with `v = σ²/2`, `s = β₃/v`; the small root is
/// recovered from `b₁ b₂ = −v` to avoid cancellation.
pub fn construct_two_point(sigma2: f64, beta3: f64) -> Result<TwoPointSpec> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return domain(format!("two-point construction needs sigma2 > 0, got {sigma2}"));
    }
    if !beta3.is_finite() {
        return domain("beta3 must be finite");
    }
    let v = sigma2 / 2.0;
    let s = beta3 / v;
    let root = s.hypot(2.0 * v.sqrt());
    let (b1, b2) = if s >= 0.0 {
        let b1 = (s + root) / 2.0;
        (b1, -v / b1)
    } else {
        let b2 = (s - root) / 2.0;
        (-v / b2, b2)
    };
    let p_mass = -b2 / (b1 - b2);
    Ok(TwoPointSpec { sigma2, beta3, b1, b2, p_mass })
}

impl TwoPointSpec {
    /// `(E B, E B², E B³)`.
    pub fn moments(&self) -> (f64, f64, f64) {
        // 1 − p loses digits when p is close to one
        let (p, q) = (self.p_mass, self.b1 / (self.b1 - self.b2));
        (
            p * self.b1 + q * self.b2,
            p * self.b1 * self.b1 + q * self.b2 * self.b2,
            p * self.b1.powi(3) + q * self.b2.powi(3),
        )
    }

    pub(crate) fn z_sd(&self) -> f64 {
        (self.sigma2 / 2.0).sqrt()
    }

    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, normal: &Normal<f64>, rng: &mut R) -> f64 {
        let b = if rng.random::<f64>() < self.p_mass { self.b1 } else { self.b2 };
        normal.sample(rng) + b
    }
}

pub fn sample_moment_matched(spec: &TwoPointSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, &[tag::PATH]);
    let normal = Normal::new(0.0, spec.z_sd()).expect("finite sd");
    (0..n).map(|_| spec.draw(&normal, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_examples() {
        let t = construct_two_point(1.0, 0.0).unwrap();
        assert!((t.b1 - 0.5f64.sqrt()).abs() < 1e-15 && (t.b2 + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((t.p_mass - 0.5).abs() < 1e-15);
        let t = construct_two_point(2.0, 0.0).unwrap();
        assert!((t.b1 - 1.0).abs() < 1e-15 && (t.b2 + 1.0).abs() < 1e-15);
        assert!(construct_two_point(0.0, 1.0).is_err());
        assert!(construct_two_point(-1.0, 1.0).is_err());
    }

    #[test]
    fn moments_hold() {
        for &(s2, b3) in &[(1.0, 0.5), (0.3, -2.0), (4.0, 3.0), (1.0, 1e-9)] {
            let t = construct_two_point(s2, b3).unwrap();
            let (m1, m2, m3) = t.moments();
            assert!(m1.abs() < 1e-12);
            assert!((m2 - s2 / 2.0).abs() < 1e-12);
            assert!((m3 - b3).abs() < 1e-12);
            assert!(t.b1 > 0.0 && t.b2 < 0.0);
        }
    }

    #[test]
    fn deterministic_single_draw() {
        let t = construct_two_point(1.0, 0.5).unwrap();
        assert_eq!(sample_moment_matched(&t, 1, 9), sample_moment_matched(&t, 1, 9));
    }
}
