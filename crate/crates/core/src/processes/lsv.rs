//! The Liverani–Saussol–Vaienti intermittent map
//! `T(x) = x(1 + 2^γ x^γ)` on `[0, 1/2)`, `2x − 1` on `[1/2, 1]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::NeumaierSum;

use super::seed::{stream_rng, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LsvObservable {
    /// `1{x < threshold}`, bounded variation.
    Indicator { threshold: f64 },
    /// `x^exponent`, Hölder of that exponent.
    Power { exponent: f64 },
    Identity,
}

impl LsvObservable {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LsvObservable::Indicator { threshold } => (x < threshold) as u8 as f64,
            LsvObservable::Power { exponent } => x.powf(exponent),
            LsvObservable::Identity => x,
        }
    }

    /// Every listed observable takes values in `[0, 1]`.
    pub fn range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsvSpec {
    pub gamma: f64,
    pub observable: LsvObservable,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    /// Length of the pre-run that estimates `ν_γ(f)`.
    #[serde(default = "default_centering_steps")]
    pub centering_steps: u64,
}

fn default_burn_in() -> u64 {
    100_000
}

fn default_centering_steps() -> u64 {
    10_000_000
}

impl LsvSpec {
    pub fn new(gamma: f64, observable: LsvObservable) -> Self {
        Self { gamma, observable, burn_in: default_burn_in(), centering_steps: default_centering_steps() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidModel(format!("LSV gamma must lie in (0, 1), got {}", self.gamma)));
        }
        match self.observable {
            LsvObservable::Indicator { threshold } if !(threshold > 0.0 && threshold < 1.0) => {
                return Err(Error::InvalidModel("indicator threshold must lie in (0, 1)".into()));
            }
            LsvObservable::Power { exponent } if !(exponent > 0.0 && exponent <= 1.0) => {
                return Err(Error::InvalidModel("Hölder exponent must lie in (0, 1]".into()));
            }
            _ => {}
        }
        if self.centering_steps < 1000 {
            return Err(Error::InvalidModel("centering pre-run needs at least 1000 steps".into()));
        }
        Ok(())
    }
}

pub fn lsv_step(x: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("LSV map is defined on [0, 1], got {x}"));
    }
    Ok(step(x, gamma, 2f64.powf(gamma)))
}

#[inline]
pub(crate) fn step(x: f64, gamma: f64, two_gamma: f64) -> f64 {
    if x < 0.5 {
        x * (1.0 + two_gamma * x.powf(gamma))
    } else {
        2.0 * x - 1.0
    }
}

/// A prepared map: constants and the estimated centering.
#[derive(Debug, Clone, PartialEq)]
pub struct LsvMap {
    pub spec: LsvSpec,
    two_gamma: f64,
    pub mean: f64,
    /// Batch-means standard error of `mean`.
    pub mean_se: f64,
}

const CENTERING_BATCHES: u64 = 100;

impl LsvMap {
    pub fn new(spec: &LsvSpec) -> Result<Self> {
        spec.validate()?;
        let two_gamma = 2f64.powf(spec.gamma);
        let mut map = Self { spec: spec.clone(), two_gamma, mean: 0.0, mean_se: 0.0 };
        // fixed stream: the centering is a function of the model alone
        let mut rng = stream_rng(0x1a5_c0de, &[tag::CENTERING]);
        let mut x = map.stationary_start(&mut rng);
        let per = spec.centering_steps / CENTERING_BATCHES;
        let mut means = Vec::with_capacity(CENTERING_BATCHES as usize);
        for _ in 0..CENTERING_BATCHES {
            let mut acc = NeumaierSum::default();
            for _ in 0..per {
                x = map.advance(x, &mut rng);
                acc.add(spec.observable.eval(x));
            }
            means.push(acc.value() / per as f64);
        }
        let (m, se) = crate::numeric::mean_and_se(&means);
        map.mean = m;
        map.mean_se = se;
        Ok(map)
    }

    /// One application of the map. The fixed point `0` is reachable only by
    /// rounding at `x = 1/2`; a fresh uniform point replaces it.
    #[inline]
    pub fn advance<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let y = step(x, self.spec.gamma, self.two_gamma);
        if y > 0.0 {
            y
        } else {
            rng.random::<f64>()
        }
    }

    /// Uniform start followed by the configured burn-in.
    pub fn stationary_start<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut x: f64 = rng.random();
        for _ in 0..self.spec.burn_in {
            x = self.advance(x, rng);
        }
        x
    }

    /// Centered observable.
    #[inline]
    pub fn observe(&self, x: f64) -> f64 {
        self.spec.observable.eval(x) - self.mean
    }

    /// `sup |f − mean|`.
    pub fn bound(&self) -> f64 {
        let (lo, hi) = self.spec.observable.range();
        (hi - self.mean).abs().max((self.mean - lo).abs())
    }
}
