//! Windowed dependence coefficients: `θ_{X,p,q}`, α-dependence and a
//! restricted τ, exact for finite chains and by nested Monte Carlo otherwise.
//!
//! Every value is a supremum over a finite window `k ≤ k₁ < … < k_p ≤ k + W`
//! and is therefore a lower bound for the coefficient itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{domain, Error, Result};
use crate::numeric::NeumaierSum;
use crate::processes::seed::{stream_rng, tag};
use crate::processes::{CircleWalkSpec, FiniteMarkovSpec, MarkovChain, ProcessModel};

/// Which exponent tuples enter the θ supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleMode {
    /// `a₁ ≥ 1`, `a_i ≥ 0`, `Σ a_i ≤ q`: zero exponents admit every smaller tuple.
    #[default]
    Gamma,
    /// All `a_i ≥ 1`: exactly `p` genuine factors.
    Positive,
}

pub const DEFAULT_WINDOW: usize = 12;

/// `P^d` for `d = 0..=max`, flattened row-major.
struct Powers {
    s: usize,
    mats: Vec<Vec<f64>>,
}

impl Powers {
    fn new(chain: &MarkovChain, max: usize) -> Self {
        let s = chain.states();
        let p: Vec<f64> = chain.transition().iter().flatten().copied().collect();
        let mut mats = Vec::with_capacity(max + 1);
        let mut cur: Vec<f64> = (0..s * s).map(|i| (i / s == i % s) as u8 as f64).collect();
        mats.push(cur.clone());
        for _ in 0..max {
            let mut next = vec![0.0; s * s];
            for i in 0..s {
                for l in 0..s {
                    let a = cur[i * s + l];
                    if a != 0.0 {
                        for j in 0..s {
                            next[i * s + j] += a * p[l * s + j];
                        }
                    }
                }
            }
            mats.push(next.clone());
            cur = next;
        }
        Self { s, mats }
    }

    fn apply(&self, d: usize, v: &[f64]) -> Vec<f64> {
        let m = &self.mats[d];
        (0..self.s)
            .map(|i| m[i * self.s..(i + 1) * self.s].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn entry(&self, d: usize, i: usize, j: usize) -> f64 {
        self.mats[d][i * self.s + j]
    }
}

/// `x ↦ E(Π_j h_j(ξ_{t_j}) | ξ₀ = x)` for nondecreasing times.
fn cond_expect(pw: &Powers, times: &[usize], inserts: &[Vec<f64>]) -> Vec<f64> {
    let m = times.len();
    let mut u = inserts[m - 1].clone();
    for j in (0..m - 1).rev() {
        let moved = pw.apply(times[j + 1] - times[j], &u);
        u = moved.iter().zip(&inserts[j]).map(|(a, b)| a * b).collect();
    }
    pw.apply(times[0], &u)
}

/// `E_π |v − E_π v|`.
fn l1_deviation(pi: &[f64], v: &[f64]) -> f64 {
    let mean = crate::numeric::dot(pi, v);
    let mut acc = NeumaierSum::default();
    pi.iter().zip(v).for_each(|(p, x)| acc.add(p * (x - mean).abs()));
    acc.value()
}

/// Strictly increasing `p`-tuples in `lo..=hi`.
fn increasing_tuples(lo: usize, hi: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, hi: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..=hi {
            if hi + 1 - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, hi, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if hi + 1 >= lo + p {
        rec(lo, hi, p, &mut Vec::new(), &mut out);
    }
    out
}

/// Nondecreasing `p`-tuples in `lo..=hi`.
fn nondecreasing_tuples(lo: usize, hi: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, hi: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..=hi {
            cur.push(i);
            rec(i, hi, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(lo, hi, p, &mut Vec::new(), &mut out);
    out
}

/// Exponent tuples of `Γ_{p,q}` under `mode`.
pub fn exponent_tuples(p: usize, q: usize, mode: TupleMode) -> Vec<Vec<u32>> {
    fn rec(p: usize, budget: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        let lo = if cur.is_empty() { 1 } else { min };
        for a in lo..=budget {
            cur.push(a);
            rec(p, budget - a, min, cur, out);
            cur.pop();
        }
    }
    let min = match mode {
        TupleMode::Gamma => 0,
        TupleMode::Positive => 1,
    };
    let mut out = Vec::new();
    rec(p, q as u32, min, &mut Vec::new(), &mut out);
    out
}

fn check_pq(p: usize, q: usize, window: usize) -> Result<()> {
    if p == 0 || p > q || q > 4 {
        return domain(format!("theta needs 1 <= p <= q <= 4, got p={p}, q={q}"));
    }
    if window < p {
        return domain(format!("window W={window} must be at least p={p}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: f64,
    /// Maximizing times and exponents.
    pub times: Vec<usize>,
    pub exponents: Vec<u32>,
    /// Always true: the window restricts the supremum.
    pub lower_bound: bool,
}

/// Exact windowed `θ_{X,p,q}(k)` for a finite chain.
pub fn theta_exact(
    spec: &FiniteMarkovSpec,
    k: usize,
    p: usize,
    q: usize,
    window: usize,
    mode: TupleMode,
) -> Result<ThetaValue> {
    check_pq(p, q, window)?;
    let chain = spec.chain()?;
    let pw = Powers::new(&chain, k + window);
    let f = chain.observable();
    let pows: Vec<Vec<f64>> = (0..=q as i32).map(|a| f.iter().map(|x| x.powi(a)).collect()).collect();
    let mut best = ThetaValue { value: 0.0, times: vec![], exponents: vec![], lower_bound: true };
    for times in increasing_tuples(k, k + window, p) {
        for exps in exponent_tuples(p, q, mode) {
            let inserts: Vec<Vec<f64>> = exps.iter().map(|&a| pows[a as usize].clone()).collect();
            let v = cond_expect(&pw, &times, &inserts);
            let d = l1_deviation(chain.stationary(), &v);
            if d > best.value {
                best = ThetaValue { value: d, times: times.clone(), exponents: exps.clone(), lower_bound: true };
            }
        }
    }
    Ok(best)
}

/// Exact windowed `θ_{X,1,1}(k)` for the circle walk from the Fourier
/// eigenrelation `E(e^{2πijξ_t} | ξ₀ = x) = cos(2πja)^t e^{2πijx}`, the
/// `L¹` norm by a midpoint rule with `nodes` points.
pub fn theta_circle_first(spec: &CircleWalkSpec, k: usize, window: usize, nodes: usize) -> Result<ThetaValue> {
    spec.validate()?;
    if nodes < 16 {
        return domain("quadrature needs at least 16 nodes");
    }
    let mut best = ThetaValue { value: 0.0, times: vec![], exponents: vec![], lower_bound: true };
    for t in k..=k + window {
        let mut acc = NeumaierSum::default();
        for i in 0..nodes {
            let x = (i as f64 + 0.5) / nodes as f64;
            let v: f64 = spec
                .fourier
                .iter()
                .map(|term| {
                    term.amplitude * spec.eigenvalue(term.k).powi(t as i32) * (TAU * term.k as f64 * x + term.phase).cos()
                })
                .sum();
            acc.add(v.abs());
        }
        let val = acc.value() / nodes as f64;
        if val > best.value {
            best = ThetaValue { value: val, times: vec![t], exponents: vec![1], lower_bound: true };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaMc {
    pub value: f64,
    pub se: f64,
    pub times: Vec<usize>,
    pub exponents: Vec<u32>,
    /// Inner sample size is small enough that `|·|` of noisy means inflates the value.
    pub bias_warning: bool,
    pub lower_bound: bool,
}

/// Nested Monte Carlo `θ_{X,p,q}(k)`: `states` stationary initial conditions,
/// `paths` continuations each.
#[allow(clippy::too_many_arguments)]
pub fn theta_mc(
    model: &ProcessModel,
    k: usize,
    p: usize,
    q: usize,
    window: usize,
    states: usize,
    paths: usize,
    seed: u64,
    mode: TupleMode,
) -> Result<ThetaMc> {
    check_pq(p, q, window)?;
    if !model.supports_conditioning() {
        return Err(Error::NotApplicable(format!("{} is not a Markov model", model.name())));
    }
    if k == 0 || states < 2 || paths < 1 {
        return domain("theta_mc needs k >= 1, at least two states and one path per state");
    }
    let sampler = model.sampler()?;
    let tuples = increasing_tuples(k, k + window, p);
    let exps = exponent_tuples(p, q, mode);
    let len = k + window;
    let per_state: Vec<Vec<f64>> = (0..states)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let mut rng = stream_rng(seed, &[tag::THETA, s as u64]);
            let start = sampler.draw_state(&mut rng);
            let mut acc = vec![0.0; tuples.len() * exps.len()];
            let mut path = vec![0.0; len];
            for _ in 0..paths {
                let mut st = start;
                sampler.fill_path(&mut st, &mut path, &mut rng)?;
                let mut slot = 0;
                for t in &tuples {
                    for a in &exps {
                        let mut prod = 1.0;
                        for (ti, ai) in t.iter().zip(a) {
                            prod *= path[ti - 1].powi(*ai as i32);
                        }
                        acc[slot] += prod;
                        slot += 1;
                    }
                }
            }
            acc.iter_mut().for_each(|v| *v /= paths as f64);
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let cells = tuples.len() * exps.len();
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    for c in 0..cells {
        let col: Vec<f64> = per_state.iter().map(|v| v[c]).collect();
        let grand = crate::numeric::sum(&col) / states as f64;
        let devs: Vec<f64> = col.iter().map(|m| (m - grand).abs()).collect();
        let (mean, se) = crate::numeric::mean_and_se(&devs);
        if mean > best.0 {
            best = (mean, se, c);
        }
    }
    let (ti, ei) = (best.2 / exps.len(), best.2 % exps.len());
    Ok(ThetaMc {
        value: best.0,
        se: best.1,
        times: tuples[ti].clone(),
        exponents: exps[ei].clone(),
        bias_warning: paths < 1000,
        lower_bound: true,
    })
}

/// Thresholds used for the α supremum: every observed value but the largest
/// (where the centered indicator vanishes).
fn value_thresholds(spec: &FiniteMarkovSpec) -> Vec<f64> {
    let mut v = spec.observable.clone();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v.pop();
    v
}

/// Exact windowed α-dependence coefficient `α_{l,Y}(n)` of `Y_i = f(ξ_i)`.
///
/// For a finite chain the supremum over thresholds is attained on the value
/// set of `f`; indices run over nondecreasing tuples in `n..=n+window`.
pub fn alpha_dep(spec: &FiniteMarkovSpec, n: usize, l: usize, window: usize) -> Result<f64> {
    if l == 0 || l > 4 {
        return domain(format!("alpha_dep needs 1 <= l <= 4, got {l}"));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let chain = spec.chain()?;
    let pi = chain.stationary();
    let pw = Powers::new(&chain, n + window);
    let thresholds = value_thresholds(spec);
    if thresholds.is_empty() {
        return Ok(0.0);
    }
    let centered: Vec<Vec<f64>> = thresholds
        .iter()
        .map(|&x| {
            let ind: Vec<f64> = spec.observable.iter().map(|&y| (y <= x) as u8 as f64).collect();
            let fx = crate::numeric::dot(pi, &ind);
            ind.iter().map(|v| v - fx).collect()
        })
        .collect();
    let mut best = 0.0f64;
    for size in 1..=l {
        for times in nondecreasing_tuples(n, n + window, size) {
            for combo in nondecreasing_tuples(0, thresholds.len() - 1, size) {
                let inserts: Vec<Vec<f64>> = combo.iter().map(|&c| centered[c].clone()).collect();
                // factors at equal times merge into one diagonal insertion
                let mut t_merged: Vec<usize> = Vec::new();
                let mut h_merged: Vec<Vec<f64>> = Vec::new();
                for (t, h) in times.iter().zip(inserts) {
                    if t_merged.last() == Some(t) {
                        let last = h_merged.last_mut().unwrap();
                        last.iter_mut().zip(&h).for_each(|(a, b)| *a *= b);
                    } else {
                        t_merged.push(*t);
                        h_merged.push(h);
                    }
                }
                let v = cond_expect(&pw, &t_merged, &h_merged);
                best = best.max(l1_deviation(pi, &v));
            }
        }
    }
    Ok(best)
}

/// A test function of the restricted τ family.
#[derive(Debug, Clone, Copy, PartialEq)]
enum TauTest {
    /// `(1/j) Σ_i |y_i − c|^η`
    Average(f64),
    /// `(1/j) max(|y_a − c|^η, |y_b − c|^η)`
    Max(usize, usize, f64),
    /// `(1/j) min(|y_a − c|^η, |y_b − c|^η)`
    Min(usize, usize, f64),
}

impl TauTest {
    fn eval(&self, y: &[f64], eta: f64) -> f64 {
        let j = y.len() as f64;
        let g = |v: f64, c: f64| (v - c).abs().powf(eta);
        match *self {
            TauTest::Average(c) => y.iter().map(|&v| g(v, c)).sum::<f64>() / j,
            TauTest::Max(a, b, c) => g(y[a], c).max(g(y[b], c)) / j,
            TauTest::Min(a, b, c) => g(y[a], c).min(g(y[b], c)) / j,
        }
    }
}

/// Restricted `τ_{η,l,Y}(k)` of `Y_i = f(ξ_i)`: the inner supremum over
/// `Λ_η(R^j)` is replaced by coordinate averages and pairwise max/min of
/// `|y − c|^η` with centers `c` in the value set of `f`, all members of `Λ_η`.
pub fn tau_restricted(spec: &FiniteMarkovSpec, k: usize, eta: f64, l: usize, window: usize) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return domain(format!("eta must lie in (0, 1], got {eta}"));
    }
    if l == 0 || l > 4 || k == 0 {
        return domain("tau_restricted needs 1 <= l <= 4 and k >= 1");
    }
    let chain = spec.chain()?;
    let s = chain.states();
    let pi = chain.stationary().to_vec();
    let pw = Powers::new(&chain, k + window);
    let mut centers = spec.observable.clone();
    centers.sort_by(|a, b| a.total_cmp(b));
    centers.dedup();
    let mut best = 0.0f64;
    for j in 1..=l {
        let mut tests: Vec<TauTest> = centers.iter().map(|&c| TauTest::Average(c)).collect();
        for a in 0..j {
            for b in a + 1..j {
                for &c in &centers {
                    tests.push(TauTest::Max(a, b, c));
                    tests.push(TauTest::Min(a, b, c));
                }
            }
        }
        for times in increasing_tuples(k, k + window, j) {
            // joint law of (ξ_{t_1}, …, ξ_{t_j}) given ξ₀, over s^j configurations
            let configs = s.pow(j as u32);
            let mut cond = vec![vec![0.0; configs]; s];
            let mut values = vec![vec![0.0; tests.len()]; configs];
            for (cfg, row) in values.iter_mut().enumerate() {
                let mut idx = Vec::with_capacity(j);
                let mut c = cfg;
                for _ in 0..j {
                    idx.push(c % s);
                    c /= s;
                }
                let y: Vec<f64> = idx.iter().map(|&i| spec.observable[i]).collect();
                for (t, slot) in tests.iter().zip(row.iter_mut()) {
                    *slot = t.eval(&y, eta);
                }
                for (x0, cx) in cond.iter_mut().enumerate() {
                    let mut prob = pw.entry(times[0], x0, idx[0]);
                    for m in 1..j {
                        prob *= pw.entry(times[m] - times[m - 1], idx[m - 1], idx[m]);
                    }
                    cx[cfg] = prob;
                }
            }
            let cond_means: Vec<Vec<f64>> = cond
                .iter()
                .map(|cx| (0..tests.len()).map(|t| (0..configs).map(|c| cx[c] * values[c][t]).sum()).collect())
                .collect();
            let uncond: Vec<f64> =
                (0..tests.len()).map(|t| (0..s).map(|x| pi[x] * cond_means[x][t]).sum()).collect();
            let mut acc = NeumaierSum::default();
            for x in 0..s {
                let sup = cond_means[x].iter().zip(&uncond).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                acc.add(pi[x] * sup);
            }
            best = best.max(acc.value());
        }
    }
    Ok(best)
}
