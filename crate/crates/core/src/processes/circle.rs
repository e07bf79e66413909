//! Random walk on the circle, `ξ_{k+1} = ξ_k ± a mod 1`, observed through a
//! trigonometric polynomial without constant term.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleWalkSpec {
    #[serde(default = "golden_step")]
    pub a: f64,
    #[serde(default = "default_terms")]
    pub fourier: Vec<FourierTerm>,
}

/// `(√5 − 1)/2`.
pub fn golden_step() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn default_terms() -> Vec<FourierTerm> {
    power_law_terms(32, 7.0)
}

/// `c_k = k^{-decay}`, `k = 1..=count`, zero phases.
pub fn power_law_terms(count: u32, decay: f64) -> Vec<FourierTerm> {
    (1..=count).map(|k| FourierTerm { k, amplitude: (k as f64).powf(-decay), phase: 0.0 }).collect()
}

impl Default for CircleWalkSpec {
    fn default() -> Self {
        Self { a: golden_step(), fourier: default_terms() }
    }
}

impl CircleWalkSpec {
    pub fn single_mode(a: f64, k: u32, amplitude: f64) -> Self {
        Self { a, fourier: vec![FourierTerm { k, amplitude, phase: 0.0 }] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::InvalidModel(format!("circle step must lie in (0, 1), got {}", self.a)));
        }
        if self.fourier.is_empty() {
            return Err(Error::InvalidModel("circle observable needs at least one Fourier term".into()));
        }
        for t in &self.fourier {
            if t.k == 0 {
                return Err(Error::InvalidModel("Fourier index 0 would break centering".into()));
            }
            if !t.amplitude.is_finite() || !t.phase.is_finite() {
                return Err(Error::InvalidModel("Fourier amplitudes and phases must be finite".into()));
            }
            let c = (TAU * t.k as f64 * self.a).cos();
            if (1.0 - c).abs() < 1e-14 {
                return Err(Error::InvalidModel(format!("k a is an integer for k = {}", t.k)));
            }
        }
        Ok(())
    }

    /// `Σ |c_k|`.
    pub fn bound(&self) -> f64 {
        self.fourier.iter().map(|t| t.amplitude.abs()).sum()
    }

    /// `sup_k k^{6+ε} |c_k|` over the declared terms.
    pub fn decay_constant(&self, eps: f64) -> f64 {
        self.fourier.iter().map(|t| (t.k as f64).powf(6.0 + eps) * t.amplitude.abs()).fold(0.0, f64::max)
    }

    /// `cos(2π k a)`, the eigenvalue of the transition kernel on mode `k`.
    pub fn eigenvalue(&self, k: u32) -> f64 {
        (TAU * k as f64 * self.a).cos()
    }
}

/// `f(x) = Σ c cos(2π k x + φ)`.
pub fn circle_observable(x: f64, spec: &CircleWalkSpec) -> f64 {
    spec.fourier.iter().map(|t| t.amplitude * (TAU * t.k as f64 * x + t.phase).cos()).sum()
}

/// Observable values along the orbit `ξ₀ + a w`, `w` in a window, by table lookup.
#[derive(Debug, Clone)]
pub(crate) struct CircleTable {
    radius: i64,
    terms: usize,
    /// `c e^{iφ} e^{2πi k a w}` for `w = −radius..=radius`, interleaved `(re, im)` per term.
    rot: Vec<f64>,
    ks: Vec<f64>,
    spec: CircleWalkSpec,
}

impl CircleTable {
    pub(crate) fn new(spec: &CircleWalkSpec, radius: i64) -> Self {
        let terms = spec.fourier.len();
        let mut rot = Vec::with_capacity((2 * radius as usize + 1) * terms * 2);
        for w in -radius..=radius {
            for t in &spec.fourier {
                let ang = TAU * (t.k as f64 * spec.a * w as f64).rem_euclid(1.0) + t.phase;
                rot.push(t.amplitude * ang.cos());
                rot.push(t.amplitude * ang.sin());
            }
        }
        let ks = spec.fourier.iter().map(|t| t.k as f64).collect();
        Self { radius, terms, rot, ks, spec: spec.clone() }
    }

    /// Fills `out[j] = f(ξ₀ + a (lo + j))`.
    pub(crate) fn orbit_values(&self, xi0: f64, lo: i64, out: &mut [f64]) {
        let mut u = Vec::with_capacity(self.terms * 2);
        for &k in &self.ks {
            let ang = TAU * (k * xi0).rem_euclid(1.0);
            u.push(ang.cos());
            u.push(ang.sin());
        }
        for (j, slot) in out.iter_mut().enumerate() {
            let w = lo + j as i64;
            if w.abs() > self.radius {
                *slot = circle_observable((xi0 + self.spec.a * w as f64).rem_euclid(1.0), &self.spec);
                continue;
            }
            let base = ((w + self.radius) as usize) * self.terms * 2;
            let row = &self.rot[base..base + self.terms * 2];
            let mut acc = 0.0;
            for (r, z) in row.chunks_exact(2).zip(u.chunks_exact(2)) {
                acc += r[0] * z[0] - r[1] * z[1];
            }
            *slot = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_values() {
        let s = CircleWalkSpec::single_mode(golden_step(), 1, 1.0);
        assert!((circle_observable(0.0, &s) - 1.0).abs() < 1e-15);
        assert!(circle_observable(0.25, &s).abs() < 1e-15);
    }

    #[test]
    fn truncation_changes_sup_by_next_amplitude() {
        let full = CircleWalkSpec::default();
        let mut cut = full.clone();
        let dropped = cut.fourier.pop().unwrap().amplitude;
        for i in 0..1000 {
            let x = i as f64 / 1000.0;
            assert!((circle_observable(x, &full) - circle_observable(x, &cut)).abs() <= dropped + 1e-16);
        }
    }

    #[test]
    fn table_matches_direct() {
        let mut spec = CircleWalkSpec::default();
        spec.fourier[1].phase = 0.7;
        let table = CircleTable::new(&spec, 50);
        let mut out = vec![0.0; 120];
        table.orbit_values(0.3141, -60, &mut out);
        for (j, v) in out.iter().enumerate() {
            let w = -60 + j as i64;
            let direct = circle_observable((0.3141 + spec.a * w as f64).rem_euclid(1.0), &spec);
            assert!((v - direct).abs() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn validation() {
        assert!(CircleWalkSpec::default().validate().is_ok());
        assert!(CircleWalkSpec::single_mode(0.5, 2, 1.0).validate().is_err());
        assert!(CircleWalkSpec::single_mode(1.5, 1, 1.0).validate().is_err());
        assert!(CircleWalkSpec { a: 0.3, fourier: vec![FourierTerm { k: 0, amplitude: 1.0, phase: 0.0 }] }
            .validate()
            .is_err());
    }
}
