//! Centered, bounded, stationary sequences `(X_k)` and their generators.
//!
//! Markov-type models carry an initial state `ξ₀` drawn from the stationary
//! law; the path is `X_k = f(ξ_k)` for `k = 1..n`, so conditioning on the past
//! means conditioning on `ξ₀`.

mod circle;
mod lsv;
mod markov;
pub mod seed;
mod two_point;

pub use circle::{circle_observable, golden_step, power_law_terms, CircleWalkSpec, FourierTerm};
pub use lsv::{lsv_step, LsvMap, LsvObservable, LsvSpec};
pub use markov::{FiniteMarkovSpec, MarkovChain, STOCHASTIC_TOL};
pub use two_point::{construct_two_point, sample_moment_matched, TwoPointSpec};

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use circle::CircleTable;
use seed::{stream_rng, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IidSpec {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    pub base: FiniteMarkovSpec,
    /// `X_k = ε_k g(ξ_{k−1})` with iid signs `ε_k`.
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentSpec {
    pub sigma2: f64,
    pub beta3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ProcessModel {
    /// Iid draws from a finite law, re-centered exactly.
    IidBounded(IidSpec),
    /// Iid `N(0, variance)`; unbounded, used as a reference.
    IidGaussian(GaussianSpec),
    FiniteMarkov(FiniteMarkovSpec),
    CircleWalk(CircleWalkSpec),
    LsvMap(LsvSpec),
    MartingaleDiff(MartingaleSpec),
    /// Iid `Y = Z + B` matching a variance and a third moment.
    MomentMatchedIid(MomentSpec),
}

impl ProcessModel {
    pub fn rademacher() -> Self {
        ProcessModel::IidBounded(IidSpec { values: vec![-1.0, 1.0], probs: vec![0.5, 0.5] })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessModel::IidBounded(_) => "IidBounded",
            ProcessModel::IidGaussian(_) => "IidGaussian",
            ProcessModel::FiniteMarkov(_) => "FiniteMarkov",
            ProcessModel::CircleWalk(_) => "CircleWalk",
            ProcessModel::LsvMap(_) => "LsvMap",
            ProcessModel::MartingaleDiff(_) => "MartingaleDiff",
            ProcessModel::MomentMatchedIid(_) => "MomentMatchedIid",
        }
    }

    /// Conditioning on `F₀` is meaningful in the simulation.
    pub fn supports_conditioning(&self) -> bool {
        !matches!(self, ProcessModel::LsvMap(_))
    }

    pub fn sampler(&self) -> Result<Sampler> {
        Sampler::new(self)
    }
}

/// Initial (or current) state of a generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    /// No memory.
    Iid,
    Discrete(usize),
    /// Point of the circle `[0, 1)`.
    Circle(f64),
    /// Point of `[0, 1]` for the interval map.
    Interval(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerMeta {
    pub model: &'static str,
    /// Raw mean subtracted from the observable.
    pub centering: f64,
    pub centering_exact: bool,
    /// Standard error of an estimated centering.
    pub centering_se: Option<f64>,
    pub burn_in: Option<u64>,
    /// Declared `sup |X_k|`; `None` for unbounded variants.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    Iid { values: Vec<f64>, probs: Vec<f64>, cum: Vec<f64> },
    Gaussian { sd: f64 },
    Markov(MarkovChain),
    Circle(CircleWalkSpec),
    Lsv(LsvMap),
    Martingale { chain: MarkovChain, g: Vec<f64> },
    Moment(TwoPointSpec),
}

/// A model prepared for repeated sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: Kind,
    meta: SamplerMeta,
}

fn check_iid(spec: &IidSpec) -> Result<()> {
    if spec.values.is_empty() || spec.values.len() != spec.probs.len() {
        return Err(Error::InvalidModel("iid law needs matching nonempty values and probs".into()));
    }
    if spec.values.iter().any(|v| !v.is_finite()) || spec.probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidModel("iid law needs finite values and nonnegative probs".into()));
    }
    let total = crate::numeric::sum(&spec.probs);
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidModel(format!("iid probs sum to {total}")));
    }
    Ok(())
}

impl Sampler {
    pub fn new(model: &ProcessModel) -> Result<Self> {
        let name = model.name();
        let exact = |centering: f64, bound: Option<f64>| SamplerMeta {
            model: name,
            centering,
            centering_exact: true,
            centering_se: None,
            burn_in: None,
            bound,
        };
        let (kind, meta) = match model {
            ProcessModel::IidBounded(spec) => {
                check_iid(spec)?;
                let mean = crate::numeric::dot(&spec.values, &spec.probs);
                let values: Vec<f64> = spec.values.iter().map(|v| v - mean).collect();
                let bound = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let mut acc = 0.0;
                let cum = spec.probs.iter().map(|p| { acc += p; acc }).collect();
                (Kind::Iid { values, probs: spec.probs.clone(), cum }, exact(mean, Some(bound)))
            }
            ProcessModel::IidGaussian(g) => {
                if !(g.variance >= 0.0) || !g.variance.is_finite() {
                    return Err(Error::InvalidModel("Gaussian variance must be finite and nonnegative".into()));
                }
                (Kind::Gaussian { sd: g.variance.sqrt() }, exact(0.0, None))
            }
            ProcessModel::FiniteMarkov(spec) => {
                let chain = spec.chain()?;
                let bound = chain.observable().iter().map(|v| v.abs()).fold(0.0, f64::max);
                let m = chain.raw_mean();
                (Kind::Markov(chain), exact(m, Some(bound)))
            }
            ProcessModel::CircleWalk(spec) => {
                spec.validate()?;
                let bound = spec.bound() * (1.0 + 4.0 * f64::EPSILON);
                (Kind::Circle(spec.clone()), exact(0.0, Some(bound)))
            }
            ProcessModel::LsvMap(spec) => {
                let map = LsvMap::new(spec)?;
                let meta = SamplerMeta {
                    model: name,
                    centering: map.mean,
                    centering_exact: false,
                    centering_se: Some(map.mean_se),
                    burn_in: Some(spec.burn_in),
                    bound: Some(map.bound()),
                };
                (Kind::Lsv(map), meta)
            }
            ProcessModel::MartingaleDiff(spec) => {
                let chain = spec.base.chain()?;
                if spec.g.len() != chain.states() || spec.g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel("g needs one finite value per base state".into()));
                }
                let bound = spec.g.iter().map(|v| v.abs()).fold(0.0, f64::max);
                (Kind::Martingale { chain, g: spec.g.clone() }, exact(0.0, Some(bound)))
            }
            ProcessModel::MomentMatchedIid(m) => {
                let t = construct_two_point(m.sigma2, m.beta3).map_err(|e| Error::InvalidModel(e.to_string()))?;
                (Kind::Moment(t), exact(0.0, None))
            }
        };
        Ok(Self { kind, meta })
    }

    pub fn meta(&self) -> &SamplerMeta {
        &self.meta
    }

    /// Draws `ξ₀` from the stationary regime.
    pub fn draw_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        match &self.kind {
            Kind::Iid { .. } | Kind::Gaussian { .. } | Kind::Moment(_) => State::Iid,
            Kind::Markov(c) | Kind::Martingale { chain: c, .. } => State::Discrete(c.draw_stationary(rng)),
            Kind::Circle(_) => State::Circle(rng.random::<f64>()),
            Kind::Lsv(map) => State::Interval(map.stationary_start(rng)),
        }
    }

    fn check_state(&self, state: &State) -> Result<()> {
        let ok = match (&self.kind, state) {
            (Kind::Iid { .. } | Kind::Gaussian { .. } | Kind::Moment(_), State::Iid) => true,
            (Kind::Markov(c) | Kind::Martingale { chain: c, .. }, State::Discrete(i)) => *i < c.states(),
            (Kind::Circle(_), State::Circle(x)) => (0.0..1.0).contains(x),
            (Kind::Lsv(_), State::Interval(x)) => (0.0..=1.0).contains(x),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("state {state:?} does not fit model {}", self.meta.model)))
        }
    }

    /// Writes `X_1..X_n` following `state` and advances `state` to time `n`.
    pub fn fill_path<R: Rng + ?Sized>(&self, state: &mut State, out: &mut [f64], rng: &mut R) -> Result<()> {
        self.check_state(state)?;
        match (&self.kind, state) {
            (Kind::Iid { values, cum, .. }, _) => {
                for x in out.iter_mut() {
                    let u: f64 = rng.random();
                    let j = cum[..cum.len() - 1].iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
                    *x = values[j];
                }
            }
            (Kind::Gaussian { sd }, _) => {
                let normal = Normal::new(0.0, *sd).expect("finite sd");
                out.iter_mut().for_each(|x| *x = normal.sample(rng));
            }
            (Kind::Moment(t), _) => {
                let normal = Normal::new(0.0, t.z_sd()).expect("finite sd");
                out.iter_mut().for_each(|x| *x = t.draw(&normal, rng));
            }
            (Kind::Markov(c), State::Discrete(s)) => {
                let f = c.observable();
                for x in out.iter_mut() {
                    *s = c.step(*s, rng);
                    *x = f[*s];
                }
            }
            (Kind::Martingale { chain, g }, State::Discrete(s)) => {
                for x in out.iter_mut() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *x = sign * g[*s];
                    *s = chain.step(*s, rng);
                }
            }
            (Kind::Circle(spec), State::Circle(xi)) => {
                for x in out.iter_mut() {
                    let d = if rng.random::<bool>() { spec.a } else { -spec.a };
                    *xi = (*xi + d).rem_euclid(1.0);
                    if *xi >= 1.0 {
                        *xi = 0.0;
                    }
                    *x = circle_observable(*xi, spec);
                }
            }
            (Kind::Lsv(map), State::Interval(y)) => {
                for x in out.iter_mut() {
                    *y = map.advance(*y, rng);
                    *x = map.observe(*y);
                }
            }
            _ => unreachable!("state checked"),
        }
        Ok(())
    }

    /// Plan for computing partial sums `S_n` at the increasing `grid`.
    pub fn sum_plan(&self, grid: &[usize]) -> Result<SumPlan<'_>> {
        if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return domain("sum grid must be strictly increasing positive integers");
        }
        let n_max = *grid.last().unwrap();
        let circle = match &self.kind {
            Kind::Circle(spec) => {
                let radius = ((10.0 * (n_max as f64).sqrt()).ceil() as usize + 16).min(n_max) as i64;
                Some(CircleTable::new(spec, radius))
            }
            _ => None,
        };
        Ok(SumPlan { sampler: self, grid: grid.to_vec(), circle })
    }
}

/// Partial sums at a fixed grid of times, with per-model shortcuts.
#[derive(Debug, Clone)]
pub struct SumPlan<'a> {
    sampler: &'a Sampler,
    grid: Vec<usize>,
    circle: Option<CircleTable>,
}

impl SumPlan<'_> {
    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn sampler(&self) -> &Sampler {
        self.sampler
    }

    /// Writes `S_{n_g}` for every grid point, starting from `state`, and
    /// advances `state` to the last grid time. Iid models sample the
    /// increments' laws directly; the others walk the path.
    pub fn sums<R: Rng + RngCore + ?Sized>(&self, state: &mut State, rng: &mut R, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), self.grid.len());
        let sampler = self.sampler;
        sampler.check_state(state)?;
        match (&sampler.kind, &mut *state) {
            (Kind::Iid { values, probs, .. }, _) => {
                let mut prev = 0;
                let mut acc = 0.0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    acc += multinomial_sum(values, probs, (n - prev) as u64, rng);
                    *slot = acc;
                    prev = n;
                }
            }
            (Kind::Gaussian { sd }, _) => {
                let mut prev = 0;
                let mut acc = 0.0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    let z: f64 = rand_distr::StandardNormal.sample(rng);
                    acc += sd * ((n - prev) as f64).sqrt() * z;
                    *slot = acc;
                    prev = n;
                }
            }
            (Kind::Moment(t), _) => {
                let mut prev = 0;
                let mut acc = 0.0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    let d = (n - prev) as u64;
                    let z: f64 = rand_distr::StandardNormal.sample(rng);
                    let k = Binomial::new(d, t.p_mass).expect("valid probability").sample(rng);
                    acc += t.z_sd() * (d as f64).sqrt() * z + t.b1 * k as f64 + t.b2 * (d - k) as f64;
                    *slot = acc;
                    prev = n;
                }
            }
            (Kind::Markov(c), State::Discrete(s)) => {
                let f = c.observable();
                let mut acc = crate::numeric::NeumaierSum::default();
                let mut k = 0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    while k < n {
                        *s = c.step(*s, rng);
                        acc.add(f[*s]);
                        k += 1;
                    }
                    *slot = acc.value();
                }
            }
            (Kind::Martingale { chain, g }, State::Discrete(s)) => {
                let mut acc = crate::numeric::NeumaierSum::default();
                let mut bits = 0u64;
                let mut k = 0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    while k < n {
                        if k % 64 == 0 {
                            bits = rng.next_u64();
                        }
                        let x = if (bits >> (k % 64)) & 1 == 1 { g[*s] } else { -g[*s] };
                        acc.add(x);
                        *s = chain.step(*s, rng);
                        k += 1;
                    }
                    *slot = acc.value();
                }
            }
            (Kind::Circle(spec), State::Circle(xi)) => {
                let table = self.circle.as_ref().expect("circle plan has a table");
                let n_max = *self.grid.last().unwrap();
                let mut pos = vec![0i64; n_max];
                let (mut w, mut lo, mut hi) = (0i64, 0i64, 0i64);
                let mut bits = 0u64;
                for (k, p) in pos.iter_mut().enumerate() {
                    if k % 64 == 0 {
                        bits = rng.next_u64();
                    }
                    w += if (bits >> (k % 64)) & 1 == 1 { 1 } else { -1 };
                    lo = lo.min(w);
                    hi = hi.max(w);
                    *p = w;
                }
                let mut vals = vec![0.0; (hi - lo + 1) as usize];
                table.orbit_values(*xi, lo, &mut vals);
                let mut acc = crate::numeric::NeumaierSum::default();
                let mut k = 0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    while k < n {
                        acc.add(vals[(pos[k] - lo) as usize]);
                        k += 1;
                    }
                    *slot = acc.value();
                }
                let mut next = (*xi + spec.a * w as f64).rem_euclid(1.0);
                if next >= 1.0 {
                    next = 0.0;
                }
                *xi = next;
            }
            (Kind::Lsv(map), State::Interval(y)) => {
                let mut acc = crate::numeric::NeumaierSum::default();
                let mut k = 0;
                for (slot, &n) in out.iter_mut().zip(&self.grid) {
                    while k < n {
                        *y = map.advance(*y, rng);
                        acc.add(map.observe(*y));
                        k += 1;
                    }
                    *slot = acc.value();
                }
            }
            _ => unreachable!("state checked"),
        }
        Ok(())
    }
}

/// `Σ_j v_j N_j` for multinomial counts `N ~ Mult(d, probs)`, drawn as a
/// chain of conditional binomials.
fn multinomial_sum<R: Rng + ?Sized>(values: &[f64], probs: &[f64], d: u64, rng: &mut R) -> f64 {
    let mut remaining = d;
    let mut rest = 1.0;
    let mut acc = 0.0;
    let last = values.len() - 1;
    for (j, (&v, &p)) in values.iter().zip(probs).enumerate() {
        if remaining == 0 {
            break;
        }
        let count = if j == last || p >= rest {
            remaining
        } else {
            Binomial::new(remaining, (p / rest).clamp(0.0, 1.0)).expect("valid probability").sample(rng)
        };
        acc += v * count as f64;
        remaining -= count;
        rest -= p;
    }
    acc
}

/// Paths per random stream in [`simulate_sums`]; fixed so results do not
/// depend on the thread count.
pub const CHUNK: usize = 1024;

/// `m` independent stationary draws of `(S_{n_g})_g`, laid out `[g][path]`.
///
/// Chunk `c` of [`CHUNK`] paths uses the stream `coords ++ [c]`. For the
/// interval map one burned-in orbit per chunk is cut into consecutive blocks
/// instead of burning in every path.
pub fn simulate_sums(sampler: &Sampler, grid: &[usize], m: usize, seed: u64, coords: &[u64]) -> Result<Vec<Vec<f64>>> {
    run_chunks(sampler, grid, m, seed, coords, None)
}

/// Like [`simulate_sums`], with every path started at `start`.
pub fn conditional_sums(
    sampler: &Sampler,
    grid: &[usize],
    start: State,
    m: usize,
    seed: u64,
    coords: &[u64],
) -> Result<Vec<Vec<f64>>> {
    sampler.check_state(&start)?;
    run_chunks(sampler, grid, m, seed, coords, Some(start))
}

fn run_chunks(
    sampler: &Sampler,
    grid: &[usize],
    m: usize,
    seed: u64,
    coords: &[u64],
    start: Option<State>,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    let plan = sampler.sum_plan(grid)?;
    let chunks = m.div_ceil(CHUNK);
    let reuse = matches!(sampler.kind, Kind::Lsv(_));
    let blocks: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut key = coords.to_vec();
            key.push(c as u64);
            let mut rng = stream_rng(seed, &key);
            let count = CHUNK.min(m - c * CHUNK);
            let mut out = vec![0.0; count * grid.len()];
            let mut state = match start {
                Some(s) => s,
                None => sampler.draw_state(&mut rng),
            };
            for (i, row) in out.chunks_exact_mut(grid.len()).enumerate() {
                if i > 0 {
                    state = match start {
                        Some(s) => s,
                        None if reuse => state,
                        None => sampler.draw_state(&mut rng),
                    };
                }
                plan.sums(&mut state, &mut rng, row)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut by_grid = vec![Vec::with_capacity(m); grid.len()];
    for block in &blocks {
        for row in block.chunks_exact(grid.len()) {
            for (g, v) in row.iter().enumerate() {
                by_grid[g].push(*v);
            }
        }
    }
    Ok(by_grid)
}

/// `(X_1, ..., X_n)` from the stationary regime, deterministic in `seed`.
pub fn sample_path(model: &ProcessModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("path length must be positive");
    }
    let sampler = model.sampler()?;
    let mut rng = stream_rng(seed, &[tag::PATH]);
    let mut state = sampler.draw_state(&mut rng);
    let mut out = vec![0.0; n];
    sampler.fill_path(&mut state, &mut out, &mut rng)?;
    Ok(out)
}

/// `X_k = ε_k g(ξ_{k−1})` over the chain `base`.
pub fn martingale_path(base: &FiniteMarkovSpec, g: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    let model = ProcessModel::MartingaleDiff(MartingaleSpec { base: base.clone(), g: g.to_vec() });
    sample_path(&model, n, seed)
}
