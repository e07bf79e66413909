//! Exact laws of `S_n` for lattice-valued finite Markov chains.
//!
//! With `f(x) − π(f) = c + h k_x`, `k_x ∈ N`, the sum is `S_n = n c + h K_n` and
//! `q_t(x, j) = P(K_t = j | ξ₀ = x)` obeys
//! `q_t(x, j) = Σ_y P(x, y) q_{t−1}(y, j − k_y)`, `q₀(x, ·) = δ₀`.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::coefficients::sigma2_exact;
use crate::error::{domain, Error, Result};
use crate::gaussian::{normal_cdf, normal_quantile, superquantile};
use crate::numeric::NeumaierSum;
use crate::processes::{FiniteMarkovSpec, MarkovChain, ProcessModel};
use crate::transport::{w2_sq_gaussian, Atoms, LatticeDist};

/// Relative tolerance of the lattice detection.
pub const LATTICE_TOL: f64 = 1e-9;

/// Default memory budget of the dynamic program.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

/// `values[i] = base + step · index[i]` with `min index = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    pub base: f64,
    pub step: f64,
    pub index: Vec<u64>,
}

/// Finds the coarsest lattice carrying `values` by a tolerant Euclid
/// reduction of pairwise gaps, then checks every value against it.
pub fn detect_lattice(values: &[f64]) -> Result<Lattice> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotApplicable("lattice detection needs finite values".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range == 0.0 {
        return Ok(Lattice { base: lo, step: 1.0, index: vec![0; values.len()] });
    }
    let tol = LATTICE_TOL * range.max(lo.abs()).max(1.0);
    let mut step = 0.0f64;
    for &v in values {
        let mut a = v - lo;
        let mut b = step;
        // tolerant gcd(a, b)
        while b > tol {
            let r = a % b;
            let r = r.min(b - r);
            a = b;
            b = r;
        }
        step = a;
    }
    if !(step > tol) {
        return Err(Error::NotApplicable("observable values are not on a common lattice".into()));
    }
    // snap the step to the best fit of the largest gap
    let top = (range / step).round();
    let step = range / top;
    let mut index = Vec::with_capacity(values.len());
    for &v in values {
        let r = (v - lo) / step;
        if (r - r.round()).abs() * step > tol {
            return Err(Error::NotApplicable(format!("value {v} is off the detected lattice step {step}")));
        }
        index.push(r.round() as u64);
    }
    if top > 1e6 {
        return Err(Error::NotApplicable(format!("lattice step {step} is too fine for the value range {range}")));
    }
    Ok(Lattice { base: lo, step, index })
}

/// Per-state laws of `S_n` given `ξ₀`, plus the unconditional law from an
/// independent forward recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSumLaw {
    pub n: usize,
    pub lattice: Lattice,
    pub stationary: Vec<f64>,
    /// Law of `S_n` given `ξ₀ = x`, indexed by `x`.
    pub conditional: Vec<LatticeDist>,
    /// Law of `S_n` under the stationary start.
    pub unconditional: LatticeDist,
}

fn normalized_rows(chain: &MarkovChain) -> Vec<Vec<f64>> {
    chain
        .transition()
        .iter()
        .map(|r| {
            let t = crate::numeric::sum(r);
            r.iter().map(|p| p / t).collect()
        })
        .collect()
}

/// Exact conditional laws of `S_n` by transfer-matrix dynamic programming.
pub fn conditional_sn_law(spec: &FiniteMarkovSpec, n: usize) -> Result<ConditionalSumLaw> {
    conditional_sn_law_with_cap(spec, n, DEFAULT_MEMORY_CAP)
}

pub fn conditional_sn_law_with_cap(spec: &FiniteMarkovSpec, n: usize, memory_cap: u64) -> Result<ConditionalSumLaw> {
    if n == 0 {
        return domain("oracle needs n >= 1");
    }
    let chain = spec.chain()?;
    let lattice = detect_lattice(chain.observable())?;
    let s = chain.states();
    let kmax = *lattice.index.iter().max().unwrap() as usize;
    let support = n * kmax + 1;
    // two buffers for each of the two recursions
    let needed = 4 * (s as u64) * (support as u64) * 8;
    if needed > memory_cap {
        return Err(Error::SupportOverflow { needed, cap: memory_cap });
    }
    let p = normalized_rows(&chain);
    let k: Vec<usize> = lattice.index.iter().map(|&i| i as usize).collect();

    // backward: q_t(x, ·)
    let mut q: Vec<Vec<f64>> = vec![vec![0.0; support]; s];
    q.iter_mut().for_each(|row| row[0] = 1.0);
    for t in 1..=n {
        let width_old = (t - 1) * kmax + 1;
        let width = t * kmax + 1;
        let next: Vec<Vec<f64>> = (0..s)
            .into_par_iter()
            .map(|x| {
                let mut row = vec![0.0; support];
                let mut comp = vec![0.0; width];
                for y in 0..s {
                    let w = p[x][y];
                    if w == 0.0 {
                        continue;
                    }
                    let shift = k[y];
                    for j in 0..width_old {
                        neumaier(&mut row[j + shift], &mut comp[j + shift], w * q[y][j]);
                    }
                }
                for j in 0..width {
                    row[j] += comp[j];
                }
                row
            })
            .collect();
        q = next;
    }

    // forward: r_t(y, ·) = P(ξ_t = y, K_t = ·), r₀(y, 0) = π(y)
    let pi = chain.stationary().to_vec();
    let mut r: Vec<Vec<f64>> = (0..s).map(|y| {
        let mut row = vec![0.0; support];
        row[0] = pi[y];
        row
    }).collect();
    for t in 1..=n {
        let width_old = (t - 1) * kmax + 1;
        let width = t * kmax + 1;
        let next: Vec<Vec<f64>> = (0..s)
            .into_par_iter()
            .map(|y| {
                let mut row = vec![0.0; support];
                let mut comp = vec![0.0; width];
                let shift = k[y];
                for x in 0..s {
                    let w = p[x][y];
                    if w == 0.0 {
                        continue;
                    }
                    for j in 0..width_old {
                        neumaier(&mut row[j + shift], &mut comp[j + shift], w * r[x][j]);
                    }
                }
                for j in 0..width {
                    row[j] += comp[j];
                }
                row
            })
            .collect();
        r = next;
    }
    let mut unconditional = vec![0.0; support];
    for j in 0..support {
        let mut acc = NeumaierSum::default();
        r.iter().for_each(|row| acc.add(row[j]));
        unconditional[j] = acc.value();
    }

    let offset = n as f64 * lattice.base;
    let conditional = q
        .into_iter()
        .map(|row| LatticeDist::new(offset, lattice.step, row))
        .collect::<Result<Vec<_>>>()?;
    let unconditional = LatticeDist::new(offset, lattice.step, unconditional)?;
    Ok(ConditionalSumLaw { n, lattice, stationary: pi, conditional, unconditional })
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl ConditionalSumLaw {
    /// `Σ_x π(x) P(S_n = · | ξ₀ = x)`.
    pub fn mixture(&self) -> Vec<f64> {
        let len = self.unconditional.probs().len();
        (0..len)
            .map(|j| {
                let mut acc = NeumaierSum::default();
                for (w, d) in self.stationary.iter().zip(&self.conditional) {
                    acc.add(w * d.probs()[j]);
                }
                acc.value()
            })
            .collect()
    }

    /// Largest atomwise gap between the mixture and the forward law.
    pub fn mixture_discrepancy(&self) -> f64 {
        self.mixture()
            .iter()
            .zip(self.unconditional.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV rows `state,value,probability` for atoms with positive mass.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["state", "value", "probability"])?;
        for (x, d) in self.conditional.iter().enumerate() {
            for (v, p) in d.atoms() {
                wr.write_record([x.to_string(), format!("{v:.16e}"), format!("{p:.16e}")])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn markov_spec(model: &ProcessModel) -> Result<&FiniteMarkovSpec> {
    match model {
        ProcessModel::FiniteMarkov(spec) => Ok(spec),
        other => Err(Error::NotApplicable(format!("the exact oracle needs a finite chain, got {}", other.name()))),
    }
}

/// Target variance of the Gaussian comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub enum Sigma2Choice {
    /// Long-run variance.
    #[default]
    Exact,
    /// `Var S_n / n`.
    FiniteN,
    Value(f64),
}

fn resolve_sigma2(spec: &FiniteMarkovSpec, law: &ConditionalSumLaw, choice: Sigma2Choice) -> Result<f64> {
    match choice {
        Sigma2Choice::Exact => sigma2_exact(&ProcessModel::FiniteMarkov(spec.clone())),
        Sigma2Choice::FiniteN => Ok(law.unconditional.variance() / law.n as f64),
        Sigma2Choice::Value(v) if v >= 0.0 => Ok(v),
        Sigma2Choice::Value(v) => domain(format!("sigma2 must be nonnegative, got {v}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactW2 {
    pub n: usize,
    pub sigma2: f64,
    /// `E W₂²(P_{S_n/√n | ξ₀}, G_{σ²})`
    pub conditional: f64,
    /// `W₂²(P_{S_n/√n}, G_{σ²})`
    pub unconditional: f64,
}

/// Exact conditional and unconditional quadratic costs of `S_n/√n`.
pub fn exact_w2(spec: &FiniteMarkovSpec, n: usize, sigma2: Sigma2Choice) -> Result<ExactW2> {
    let law = conditional_sn_law(spec, n)?;
    exact_w2_from_law(spec, &law, sigma2)
}

pub fn exact_w2_from_law(spec: &FiniteMarkovSpec, law: &ConditionalSumLaw, sigma2: Sigma2Choice) -> Result<ExactW2> {
    let s2 = resolve_sigma2(spec, law, sigma2)?;
    let scale = 1.0 / (law.n as f64).sqrt();
    let costs: Vec<f64> = law
        .conditional
        .par_iter()
        .map(|d| w2_sq_gaussian(&d.scaled(scale)?, s2))
        .collect::<Result<_>>()?;
    let mut acc = NeumaierSum::default();
    law.stationary.iter().zip(&costs).for_each(|(w, c)| acc.add(w * c));
    let unconditional = w2_sq_gaussian(&law.unconditional.scaled(scale)?, s2)?;
    Ok(ExactW2 { n: law.n, sigma2: s2, conditional: acc.value(), unconditional })
}

/// `E W₂²(P_{S_n/√n | ξ₀}, G_{σ²})`; `sigma2 = None` uses the long-run variance.
pub fn exact_conditional_w2(model: &ProcessModel, n: usize, sigma2: Option<f64>) -> Result<f64> {
    let spec = markov_spec(model)?;
    let choice = sigma2.map(Sigma2Choice::Value).unwrap_or_default();
    Ok(exact_w2(spec, n, choice)?.conditional)
}

fn standardized(law: &ConditionalSumLaw) -> Result<LatticeDist> {
    let var = law.unconditional.variance();
    if !(var > 1e-300) {
        return Err(Error::Precondition("degenerate sum: Var S_n = 0".into()));
    }
    law.unconditional.scaled(1.0 / var.sqrt())
}

/// `sup_x |P(S_n/σ_n ≤ x) − Φ(x)|`, checking both one-sided limits at every atom.
pub fn exact_berry_esseen(model: &ProcessModel, n: usize) -> Result<f64> {
    let spec = markov_spec(model)?;
    berry_esseen_from_law(&conditional_sn_law(spec, n)?)
}

pub fn berry_esseen_from_law(law: &ConditionalSumLaw) -> Result<f64> {
    let z = standardized(law)?;
    Ok(kolmogorov_to_normal(&z.atoms()))
}

/// Kolmogorov distance between sorted atoms and `Φ`.
pub(crate) fn kolmogorov_to_normal(atoms: &[(f64, f64)]) -> f64 {
    let mut cum = NeumaierSum::default();
    let mut worst = 0.0f64;
    for &(x, w) in atoms {
        let phi = normal_cdf(x);
        let below = cum.value();
        cum.add(w);
        worst = worst.max((below - phi).abs()).max((cum.value().min(1.0) - phi).abs());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileGaps {
    pub n: usize,
    /// `(u, |F^{-1}_{S_n/σ_n}(u) − Φ^{-1}(u)|, C · shape(u))`
    pub rows: Vec<(f64, f64, f64)>,
    /// Smallest `C` making the bound hold on the grid.
    pub fitted_c: f64,
}

/// `max((n u(1−u))^{-1/2}, (n u(1−u))^{-1/3} |log(u(1−u))|^{-1/6})`.
pub fn quantile_gap_shape(n: usize, u: f64) -> f64 {
    let v = u * (1.0 - u);
    let nv = n as f64 * v;
    nv.powf(-0.5).max(nv.powf(-1.0 / 3.0) * v.ln().abs().powf(-1.0 / 6.0))
}

fn check_grid(u_grid: &[f64], allow_one: bool) -> Result<()> {
    for &u in u_grid {
        let ok = u > 0.0 && (u < 1.0 || (allow_one && u == 1.0));
        if !ok {
            return domain(format!("level {u} outside the allowed range"));
        }
    }
    Ok(())
}

pub fn exact_quantile_gaps(model: &ProcessModel, n: usize, u_grid: &[f64]) -> Result<QuantileGaps> {
    let spec = markov_spec(model)?;
    quantile_gaps_from_law(&conditional_sn_law(spec, n)?, u_grid)
}

pub fn quantile_gaps_from_law(law: &ConditionalSumLaw, u_grid: &[f64]) -> Result<QuantileGaps> {
    check_grid(u_grid, false)?;
    let z = standardized(law)?;
    let mut gaps = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        gaps.push((u, (z.quantile(u)? - normal_quantile(u)?).abs()));
    }
    let fitted_c = gaps.iter().map(|&(u, g)| g / quantile_gap_shape(law.n, u)).fold(0.0, f64::max);
    let rows = gaps.into_iter().map(|(u, g)| (u, g, fitted_c * quantile_gap_shape(law.n, u))).collect();
    Ok(QuantileGaps { n: law.n, rows, fitted_c })
}

/// `Q_{1,Z}(u) = (1/u) ∫₀ᵘ F_Z^{-1}(1−t) dt`: mean of the top `u` of the mass.
pub fn lattice_superquantile(z: &LatticeDist, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return domain(format!("superquantile level must be in (0, 1], got {u}"));
    }
    let mut remaining = u;
    let mut acc = NeumaierSum::default();
    for (x, w) in z.atoms().into_iter().rev() {
        let take = w.min(remaining);
        acc.add(take * x);
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    Ok(acc.value() / u)
}

/// `(u, |Q_{1,S_n/σ_n}(u) − Q_{1,Y}(u)|)` over the grid.
pub fn exact_superquantile_gap(model: &ProcessModel, n: usize, u_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let spec = markov_spec(model)?;
    superquantile_gaps_from_law(&conditional_sn_law(spec, n)?, u_grid)
}

pub fn superquantile_gaps_from_law(law: &ConditionalSumLaw, u_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_grid(u_grid, true)?;
    let z = standardized(law)?;
    u_grid.iter().map(|&u| Ok((u, (lattice_superquantile(&z, u)? - superquantile(u)?).abs()))).collect()
}
