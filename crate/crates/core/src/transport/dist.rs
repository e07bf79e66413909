use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Tolerance on total mass of a [`LatticeDist`].
pub const MASS_TOL: f64 = 1e-12;

/// A law given as sorted `(value, probability)` atoms.
///
/// Both [`EmpiricalDist`] and [`LatticeDist`] expose this view; the transport
/// integrals only ever read atoms in increasing order.
pub trait Atoms {
    /// Atoms with positive mass, sorted by value.
    fn atoms(&self) -> Vec<(f64, f64)>;

    fn mean(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.atoms() {
            s.add(x * w);
        }
        s.value()
    }

    fn second_moment(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.atoms() {
            s.add(x * x * w);
        }
        s.value()
    }
}

/// Sorted sample with uniform weights `1/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    samples: Vec<f64>,
}

impl EmpiricalDist {
    /// Sorts the sample. Fails on an empty sample or non-finite values.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution("empty sample".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite sample value".into()));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(Self { samples })
    }

    /// Wraps an already sorted sample; returns an error if it is not sorted.
    pub fn from_sorted(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution("empty sample".into()));
        }
        if samples.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidDistribution("sample is not sorted".into()));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `F^{-1}(u) = inf{x : F(x) ≥ u}` = the `⌈u·m⌉`-th order statistic.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0,1], got {u}")));
        }
        let m = self.samples.len();
        let idx = ((u * m as f64).ceil() as usize).clamp(1, m);
        Ok(self.samples[idx - 1])
    }

    /// Multiplies every sample by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { samples: self.samples.iter().map(|x| x * factor).collect() }
    }
}

impl Atoms for EmpiricalDist {
    fn atoms(&self) -> Vec<(f64, f64)> {
        let w = 1.0 / self.samples.len() as f64;
        self.samples.iter().map(|&x| (x, w)).collect()
    }

    fn mean(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for &x in &self.samples {
            s.add(x);
        }
        s.value() / self.samples.len() as f64
    }
}

/// Finitely supported law on `offset + i·step`, `i = 0..probs.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDist {
    offset: f64,
    step: f64,
    probs: Vec<f64>,
}

impl LatticeDist {
    pub fn new(offset: f64, step: f64, probs: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "lattice needs finite offset and positive step, got offset={offset}, step={step}"
            )));
        }
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("lattice law has no atoms".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
        }
        let total = crate::numeric::sum(&probs);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total:.17}, expected 1"
            )));
        }
        Ok(Self { offset, step, probs })
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self { offset: x, step: 1.0, probs: vec![1.0] }
    }

    /// Uniform law on `{-1, +1}`.
    pub fn rademacher() -> Self {
        Self { offset: -1.0, step: 2.0, probs: vec![0.5, 0.5] }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_point(&self, i: usize) -> f64 {
        self.offset + i as f64 * self.step
    }

    /// Law of `factor · X` for `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Domain(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self { offset: self.offset * factor, step: self.step * factor, probs: self.probs.clone() })
    }

    /// Law of `X + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { offset: self.offset + shift, step: self.step, probs: self.probs.clone() }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut s = NeumaierSum::default();
        for (x, w) in self.atoms() {
            s.add((x - m) * (x - m) * w);
        }
        s.value()
    }

    /// Left-continuous quantile `inf{x : F(x) ≥ u}`, evaluated through upper
    /// tail sums so levels close to one keep their precision.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0,1], got {u}")));
        }
        if u >= 0.5 {
            return Ok(self.upper_quantile(1.0 - u));
        }
        let tol = MASS_TOL * u;
        let mut cum = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            cum += p;
            if cum >= u - tol {
                return Ok(self.support_point(i));
            }
        }
        Ok(self.support_point(self.probs.len() - 1))
    }

    /// `F^{-1}(1 - v)` for a tail level `v ∈ [0, 1)`: the smallest atom whose
    /// strict upper tail `P(X > x)` is at most `v`.
    pub fn upper_quantile(&self, v: f64) -> f64 {
        let tol = MASS_TOL * v;
        let mut tail = 0.0;
        let mut chosen = self.probs.len() - 1;
        for i in (0..self.probs.len()).rev() {
            // tail = P(X > x_i); an empty atom inherits the tail of the one below
            if tail > v + tol {
                break;
            }
            chosen = i;
            tail += self.probs[i];
        }
        self.support_point(chosen)
    }
}

impl Atoms for LatticeDist {
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, &p)| (self.support_point(i), p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_quantile_left_continuous() {
        let d = EmpiricalDist::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(d.quantile(0.25).unwrap(), 1.0);
        assert_eq!(d.quantile(0.2500001).unwrap(), 2.0);
        assert_eq!(d.quantile(1.0).unwrap(), 4.0);
        assert!(d.quantile(0.0).is_err());
        assert!(EmpiricalDist::new(vec![]).is_err());
        assert!(EmpiricalDist::new(vec![f64::NAN]).is_err());
        assert!(EmpiricalDist::from_sorted(vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeDist::new(0.0, 1.0, vec![0.5, 0.4]).is_err());
        assert!(LatticeDist::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(LatticeDist::new(0.0, 1.0, vec![1.5, -0.5]).is_err());
        let r = LatticeDist::rademacher();
        assert_eq!(r.mean(), 0.0);
        assert_eq!(r.second_moment(), 1.0);
    }

    #[test]
    fn lattice_quantile_ties_take_lower_atom() {
        let d = LatticeDist::new(0.0, 1.0, vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_eq!(d.quantile(0.25).unwrap(), 0.0);
        assert_eq!(d.quantile(0.26).unwrap(), 1.0);
        assert_eq!(d.quantile(0.75).unwrap(), 2.0);
        assert_eq!(d.quantile(1.0).unwrap(), 3.0);
        assert_eq!(d.quantile(1e-9).unwrap(), 0.0);
    }

    #[test]
    fn lattice_quantile_skips_empty_atoms() {
        let d = LatticeDist::new(-2.0, 1.0, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), -2.0);
        assert_eq!(d.quantile(0.51).unwrap(), 1.0);
    }
}
