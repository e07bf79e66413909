//! Finite-state Markov chains with a real observable.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Row tolerance for stochastic matrices and stationarity.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteMarkovSpec {
    pub transition: Vec<Vec<f64>>,
    /// Raw observable `f`; sampling uses `f − π(f)`.
    pub observable: Vec<f64>,
}

impl FiniteMarkovSpec {
    pub fn new(transition: Vec<Vec<f64>>, observable: Vec<f64>) -> Result<Self> {
        let spec = Self { transition, observable };
        spec.validate()?;
        Ok(spec)
    }

    /// Two states with flip probability `flip` and `f = ±1`.
    pub fn symmetric_two_state(flip: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]], vec![-1.0, 1.0])
    }

    /// Every row equal to `pi`: an iid sequence.
    pub fn iid_rows(pi: Vec<f64>, observable: Vec<f64>) -> Result<Self> {
        let rows = vec![pi.clone(); pi.len()];
        Self::new(rows, observable)
    }

    pub fn states(&self) -> usize {
        self.observable.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.observable.len();
        if s == 0 {
            return Err(Error::InvalidModel("chain needs at least one state".into()));
        }
        if self.transition.len() != s {
            return Err(Error::InvalidModel(format!(
                "transition has {} rows for {s} observable values",
                self.transition.len()
            )));
        }
        if self.observable.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("observable values must be finite".into()));
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != s {
                return Err(Error::InvalidModel(format!("row {i} has {} entries, expected {s}", row.len())));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidModel(format!("row {i} has an entry outside [0, 1]")));
            }
            let total = crate::numeric::sum(row);
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel(format!("row {i} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let s = self.states();
        DMatrix::from_fn(s, s, |i, j| self.transition[i][j])
    }

    /// Unique stationary law, by a bordered linear solve with one refinement step.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let s = self.states();
        let p = self.matrix();
        let mut a = p.transpose() - DMatrix::<f64>::identity(s, s);
        for j in 0..s {
            a[(s - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(s);
        b[s - 1] = 1.0;
        let lu = a.clone().lu();
        let mut pi = lu
            .solve(&b)
            .ok_or_else(|| Error::InvalidModel("chain has no unique stationary law".into()))?;
        let r = &b - &a * &pi;
        if let Some(d) = lu.solve(&r) {
            pi += d;
        }
        if pi.iter().any(|v| !v.is_finite() || *v < -1e-10) {
            return Err(Error::InvalidModel("chain has no unique stationary law".into()));
        }
        let mut pi: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
        let total = crate::numeric::sum(&pi);
        pi.iter_mut().for_each(|v| *v /= total);
        for j in 0..s {
            let mut acc = NeumaierSum::default();
            for i in 0..s {
                acc.add(pi[i] * self.transition[i][j]);
            }
            if (acc.value() - pi[j]).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel(format!(
                    "stationary solve is not accurate enough (residual {:e} at state {j})",
                    acc.value() - pi[j]
                )));
            }
        }
        Ok(pi)
    }

    pub fn chain(&self) -> Result<MarkovChain> {
        MarkovChain::new(self)
    }
}

/// A validated chain with its stationary law and centered observable.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    spec: FiniteMarkovSpec,
    pi: Vec<f64>,
    mean: f64,
    centered: Vec<f64>,
    cum_rows: Vec<Vec<f64>>,
    cum_pi: Vec<f64>,
}

fn cumulative(w: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::default();
    w.iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect()
}

#[inline]
fn pick(cum: &[f64], u: f64) -> usize {
    let last = cum.len() - 1;
    cum[..last].iter().position(|&c| u < c).unwrap_or(last)
}

impl MarkovChain {
    pub fn new(spec: &FiniteMarkovSpec) -> Result<Self> {
        let pi = spec.stationary()?;
        let mut acc = NeumaierSum::default();
        for (w, f) in pi.iter().zip(&spec.observable) {
            acc.add(w * f);
        }
        let mean = acc.value();
        let centered = spec.observable.iter().map(|f| f - mean).collect();
        let cum_rows = spec.transition.iter().map(|r| cumulative(r)).collect();
        let cum_pi = cumulative(&pi);
        Ok(Self { spec: spec.clone(), pi, mean, centered, cum_rows, cum_pi })
    }

    pub fn spec(&self) -> &FiniteMarkovSpec {
        &self.spec
    }

    pub fn states(&self) -> usize {
        self.pi.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.spec.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// `π(f)` of the raw observable.
    pub fn raw_mean(&self) -> f64 {
        self.mean
    }

    /// `f − π(f)`.
    pub fn observable(&self) -> &[f64] {
        &self.centered
    }

    /// `(P v)(x) = Σ_y P(x, y) v(y)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.spec
            .transition
            .iter()
            .map(|row| {
                let mut acc = NeumaierSum::default();
                row.iter().zip(v).for_each(|(p, x)| acc.add(p * x));
                acc.value()
            })
            .collect()
    }

    /// `E_π v`.
    pub fn expect(&self, v: &[f64]) -> f64 {
        let mut acc = NeumaierSum::default();
        self.pi.iter().zip(v).for_each(|(p, x)| acc.add(p * x));
        acc.value()
    }

    pub fn draw_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        pick(&self.cum_pi, rng.random::<f64>())
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        pick(&self.cum_rows[state], rng.random::<f64>())
    }
}
