//! Long-run variance `σ²`, `Var S_n` and the third-order constant `β₃`.

use nalgebra::DMatrix;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::numeric::{Estimate, NeumaierSum};
use crate::processes::seed::tag;
use crate::processes::{simulate_sums, CircleWalkSpec, MarkovChain, ProcessModel};

/// Largest modulus among the eigenvalues of `P − Π`, i.e. the second-largest
/// eigenvalue modulus of an irreducible `P`.
pub fn second_eigen_modulus(chain: &MarkovChain) -> f64 {
    let s = chain.states();
    let pi = chain.stationary();
    let m = DMatrix::from_fn(s, s, |i, j| chain.transition()[i][j] - pi[j]);
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_convergent(chain: &MarkovChain) -> Result<f64> {
    let rho = second_eigen_modulus(chain);
    if rho >= 1.0 - 1e-12 {
        return Err(Error::NotApplicable(format!(
            "covariance series does not converge: restricted spectral radius {rho}"
        )));
    }
    Ok(rho)
}

/// `σ² = 2 π(f Z f) − π(f²)` with the fundamental matrix `Z = (I − P + Π)^{-1}`.
pub fn markov_sigma2(chain: &MarkovChain) -> Result<f64> {
    check_convergent(chain)?;
    let s = chain.states();
    let pi = chain.stationary();
    let f = chain.observable();
    let a = DMatrix::from_fn(s, s, |i, j| (i == j) as u8 as f64 - chain.transition()[i][j] + pi[j]);
    let zf = a
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(f))
        .ok_or_else(|| Error::NotApplicable("fundamental matrix is singular".into()))?;
    let mut acc = NeumaierSum::default();
    for i in 0..s {
        acc.add(pi[i] * f[i] * (2.0 * zf[i] - f[i]));
    }
    Ok(acc.value().max(0.0))
}

/// Fourier coefficients merged by frequency: `(k, |Σ c e^{iφ}|²)`.
fn circle_power(spec: &CircleWalkSpec) -> Vec<(u32, f64)> {
    let mut by_k: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for t in &spec.fourier {
        let e = by_k.entry(t.k).or_default();
        e.0 += t.amplitude * t.phase.cos();
        e.1 += t.amplitude * t.phase.sin();
    }
    by_k.into_iter().map(|(k, (re, im))| (k, re * re + im * im)).collect()
}

/// `Σ_k |ĉ_k|²/2 · (1 + λ_k)/(1 − λ_k)` with `λ_k = cos(2π k a)`.
pub fn circle_sigma2(spec: &CircleWalkSpec) -> Result<f64> {
    spec.validate()?;
    Ok(circle_power(spec)
        .into_iter()
        .map(|(k, pw)| {
            let l = spec.eigenvalue(k);
            pw / 2.0 * (1.0 + l) / (1.0 - l)
        })
        .sum())
}

/// Long-run variance for models where it is available in closed form.
pub fn sigma2_exact(model: &ProcessModel) -> Result<f64> {
    match model {
        ProcessModel::FiniteMarkov(spec) => markov_sigma2(&spec.chain()?),
        ProcessModel::CircleWalk(spec) => circle_sigma2(spec),
        // martingale differences and iid laws are uncorrelated
        _ => covariances(model, 0).map(|c| c[0]),
    }
}

/// Exact `Cov(X₀, X_k)` for `k = 0..=max_lag`.
pub fn covariances(model: &ProcessModel, max_lag: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; max_lag + 1];
    match model {
        ProcessModel::IidBounded(_) | ProcessModel::IidGaussian(_) | ProcessModel::MomentMatchedIid(_) => {
            out[0] = match model {
                ProcessModel::IidGaussian(g) => g.variance,
                ProcessModel::MomentMatchedIid(m) => m.sigma2,
                ProcessModel::IidBounded(spec) => {
                    let sampler = model.sampler()?;
                    let mean = sampler.meta().centering;
                    let mut acc = NeumaierSum::default();
                    spec.values.iter().zip(&spec.probs).for_each(|(v, p)| acc.add(p * (v - mean) * (v - mean)));
                    acc.value()
                }
                _ => unreachable!(),
            };
        }
        ProcessModel::FiniteMarkov(spec) => {
            let chain = spec.chain()?;
            let f = chain.observable().to_vec();
            let mut v = f.clone();
            for (k, slot) in out.iter_mut().enumerate() {
                if k > 0 {
                    v = chain.apply(&v);
                }
                let prod: Vec<f64> = f.iter().zip(&v).map(|(a, b)| a * b).collect();
                *slot = chain.expect(&prod);
            }
        }
        ProcessModel::CircleWalk(spec) => {
            spec.validate()?;
            let power = circle_power(spec);
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = power.iter().map(|&(j, pw)| pw / 2.0 * spec.eigenvalue(j).powi(k as i32)).sum();
            }
        }
        ProcessModel::MartingaleDiff(spec) => {
            let chain = spec.base.chain()?;
            let g2: Vec<f64> = spec.g.iter().map(|g| g * g).collect();
            if g2.len() != chain.states() {
                return Err(Error::InvalidModel("g needs one value per base state".into()));
            }
            out[0] = chain.expect(&g2);
        }
        ProcessModel::LsvMap(_) => {
            return Err(Error::NotApplicable("covariances of the interval map are not available in closed form".into()))
        }
    }
    Ok(out)
}

/// `Var S_n = n c₀ + 2 Σ_{k<n} (n − k) c_k` from exact covariances.
pub fn var_sn(model: &ProcessModel, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("var_sn needs n >= 1");
    }
    let c = covariances(model, n - 1)?;
    let mut acc = NeumaierSum::default();
    acc.add(n as f64 * c[0]);
    for (k, ck) in c.iter().enumerate().skip(1) {
        acc.add(2.0 * (n - k) as f64 * ck);
    }
    Ok(acc.value())
}

/// Sample variance of `S_n` over `paths` stationary draws.
pub fn var_sn_mc(model: &ProcessModel, n: usize, paths: usize, seed: u64) -> Result<Estimate> {
    if n == 0 || paths < 2 {
        return domain("var_sn_mc needs n >= 1 and at least two paths");
    }
    let sampler = model.sampler()?;
    let sums = simulate_sums(&sampler, &[n], paths, seed, &[tag::VARIANCE, n as u64])?;
    let s = &sums[0];
    let mean = crate::numeric::sum(s) / s.len() as f64;
    let sq: Vec<f64> = s.iter().map(|x| (x - mean) * (x - mean)).collect();
    let mut e = Estimate::from_samples(&sq);
    e.value *= paths as f64 / (paths as f64 - 1.0);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta3 {
    pub value: f64,
    /// Geometric envelope of the omitted lags (`0` when the series is finite).
    pub tail_bound: f64,
    pub truncation: usize,
}

/// `β₃ = E X₀³ + 3 Σ_{i≥1} {E(X₀² X_i) + E(X₀ X_i²)} + 6 Σ_{1≤u<v} E(X₀ X_u X_v)`,
/// truncated at lag `truncation` for Markov chains.
pub fn beta3(model: &ProcessModel, truncation: usize) -> Result<Beta3> {
    if truncation == 0 {
        return domain("beta3 truncation must be >= 1");
    }
    let finite = |value| Ok(Beta3 { value, tail_bound: 0.0, truncation });
    match model {
        ProcessModel::IidBounded(spec) => {
            let mean = crate::numeric::dot(&spec.values, &spec.probs);
            let mut acc = NeumaierSum::default();
            spec.values.iter().zip(&spec.probs).for_each(|(v, p)| acc.add(p * (v - mean).powi(3)));
            finite(acc.value())
        }
        ProcessModel::IidGaussian(_) | ProcessModel::MartingaleDiff(_) => finite(0.0),
        ProcessModel::MomentMatchedIid(m) => finite(m.beta3),
        ProcessModel::FiniteMarkov(spec) => markov_beta3(&spec.chain()?, truncation),
        ProcessModel::CircleWalk(_) | ProcessModel::LsvMap(_) => Err(Error::NotApplicable(format!(
            "no exact beta3 for {}; use beta3_mc",
            model.name()
        ))),
    }
}

fn markov_beta3(chain: &MarkovChain, t: usize) -> Result<Beta3> {
    let rho = check_convergent(chain)?;
    let f = chain.observable();
    let f2: Vec<f64> = f.iter().map(|x| x * x).collect();
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    // g[d] = P^d f, g2[d] = P^d f²
    let mut g = vec![f.to_vec()];
    let mut g2 = vec![f2.clone()];
    for d in 1..=t {
        g.push(chain.apply(&g[d - 1]));
        g2.push(chain.apply(&g2[d - 1]));
    }
    let mut total = NeumaierSum::default();
    total.add(chain.expect(&mul(&f2, f)));
    let mut single = Vec::with_capacity(t);
    for i in 1..=t {
        let term = chain.expect(&mul(&f2, &g[i])) + chain.expect(&mul(f, &g2[i]));
        single.push((i, term));
        total.add(3.0 * term);
    }
    // E(X₀ X_u X_{u+d}) = π(f · P^u (f · P^d f))
    let mut double = Vec::new();
    for d in 1..t {
        let mut h = mul(f, &g[d]);
        for u in 1..=(t - d) {
            h = chain.apply(&h);
            let term = chain.expect(&mul(f, &h));
            double.push((u.max(d), term));
            total.add(6.0 * term);
        }
    }
    let rho = rho.max(1e-6);
    let ln_rho = rho.ln();
    let envelope = |terms: &[(usize, f64)]| -> f64 {
        terms
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|(m, v)| v.abs().ln() - *m as f64 * ln_rho)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let c1 = envelope(&single);
    let c2 = envelope(&double);
    // rounding allowance for the computed terms
    let abs_sum: f64 = single.iter().chain(&double).map(|(_, v)| v.abs()).sum();
    let mut tail = 16.0 * f64::EPSILON * (abs_sum + 1.0);
    if c1.is_finite() {
        tail += 3.0 * (c1 + (t + 1) as f64 * ln_rho).exp() / (1.0 - rho);
    }
    if c2.is_finite() {
        // pairs (u, d) with u + d > t and max(u, d) = m number at most 2m − 1
        let mut m = t / 2 + 1;
        loop {
            let term = 6.0 * (2 * m - 1) as f64 * (c2 + m as f64 * ln_rho).exp();
            tail += term;
            if term < 1e-300 || term < 1e-17 * tail || m > t + 100_000 {
                break;
            }
            m += 1;
        }
    }
    Ok(Beta3 { value: total.value(), tail_bound: tail, truncation: t })
}

/// `E S_n³ / n` by simulation, using the central third moment.
pub fn beta3_mc(model: &ProcessModel, n: usize, paths: usize, seed: u64) -> Result<Estimate> {
    if n == 0 || paths < 2 {
        return domain("beta3_mc needs n >= 1 and at least two paths");
    }
    let sampler = model.sampler()?;
    let sums = simulate_sums(&sampler, &[n], paths, seed, &[tag::MOMENTS, n as u64])?;
    let s = &sums[0];
    let mean = crate::numeric::sum(s) / s.len() as f64;
    let cubes: Vec<f64> = s.iter().map(|x| (x - mean).powi(3) / n as f64).collect();
    Ok(Estimate::from_samples(&cubes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConstants {
    pub sigma2: f64,
    pub sigma_n2: BTreeMap<usize, f64>,
    pub beta3: f64,
    pub beta3_tail: f64,
    pub truncation: usize,
}

/// Exact `σ²`, `Var S_n` on `ns` and `β₃` for oracle-capable models.
pub fn limit_constants(model: &ProcessModel, ns: &[usize], truncation: usize) -> Result<LimitConstants> {
    let sigma2 = sigma2_exact(model)?;
    let sigma_n2 = ns.iter().map(|&n| Ok((n, var_sn(model, n)?))).collect::<Result<_>>()?;
    let b = beta3(model, truncation)?;
    Ok(LimitConstants { sigma2, sigma_n2, beta3: b.value, beta3_tail: b.tail_bound, truncation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{golden_step, FiniteMarkovSpec};

    fn two_state(flip: f64) -> ProcessModel {
        ProcessModel::FiniteMarkov(FiniteMarkovSpec::symmetric_two_state(flip).unwrap())
    }

    #[test]
    fn symmetric_two_state_sigma2() {
        for &p in &[0.1, 0.25, 0.5, 0.8] {
            let s2 = sigma2_exact(&two_state(p)).unwrap();
            assert!((s2 - (1.0 - p) / p).abs() < 1e-12, "p={p}: {s2}");
        }
    }

    #[test]
    fn iid_rows_sigma2_is_variance() {
        let spec = FiniteMarkovSpec::iid_rows(vec![0.2, 0.5, 0.3], vec![-1.0, 0.0, 3.0]).unwrap();
        let s2 = sigma2_exact(&ProcessModel::FiniteMarkov(spec)).unwrap();
        let mean = -0.2 + 0.3 * 3.0;
        let var = 0.2 * (-1.0 - mean) * (-1.0f64 - mean) + 0.5 * mean * mean + 0.3 * (3.0 - mean) * (3.0f64 - mean);
        assert!((s2 - var).abs() < 1e-12);
    }

    #[test]
    fn var_sn_examples() {
        assert!((var_sn(&ProcessModel::rademacher(), 10).unwrap() - 10.0).abs() < 1e-12);
        assert!((var_sn(&two_state(0.25), 2).unwrap() - 3.0).abs() < 1e-12);
        let m = two_state(0.3);
        let ratio = var_sn(&m, 1 << 14).unwrap() / (1 << 14) as f64;
        assert!((ratio / sigma2_exact(&m).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn periodic_chain_rejected() {
        let spec = FiniteMarkovSpec::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![-1.0, 1.0]).unwrap();
        assert!(matches!(sigma2_exact(&ProcessModel::FiniteMarkov(spec)), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn circle_single_mode_sigma2() {
        let a = golden_step();
        let spec = CircleWalkSpec::single_mode(a, 1, 1.0);
        let l = (std::f64::consts::TAU * a).cos();
        let s2 = circle_sigma2(&spec).unwrap();
        assert!((s2 - 0.5 * (1.0 + l) / (1.0 - l)).abs() < 1e-14);
    }

    #[test]
    fn beta3_of_symmetric_and_iid() {
        let b = beta3(&two_state(0.3), 64).unwrap();
        assert!(b.value.abs() <= b.tail_bound + 1e-14);
        let iid = ProcessModel::IidBounded(crate::processes::IidSpec { values: vec![0.0, 1.0], probs: vec![0.8, 0.2] });
        let b = beta3(&iid, 8).unwrap();
        // centered Bernoulli(0.2): p(1−p)(1−2p)
        assert!((b.value - 0.2 * 0.8 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn beta3_truncation_within_tail_bound() {
        let spec = FiniteMarkovSpec::new(
            vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]],
            vec![-1.0, 0.0, 2.0],
        )
        .unwrap();
        let m = ProcessModel::FiniteMarkov(spec);
        for t in [4, 8, 16] {
            let a = beta3(&m, t).unwrap();
            let b = beta3(&m, t + 8).unwrap();
            assert!((a.value - b.value).abs() <= a.tail_bound, "t={t}");
        }
    }
}
