//! Monte Carlo estimators of transport costs and Kolmogorov distances.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::var_sn;
use crate::error::{domain, Error, Result};
use crate::gaussian::{normal_cdf, normal_pdf, normal_quantile};
use crate::numeric::NeumaierSum;
use crate::processes::seed::{stream_rng, tag};
use crate::processes::{conditional_sums, simulate_sums, ProcessModel, Sampler};

pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const MIN_POOLED: usize = 1000;

/// Cumulative Gaussian partial moments `g[i] = ∫₀^{i/m} Φ^{-1} = −φ(Φ^{-1}(i/m))`.
///
/// For a sorted sample `x`, `W₂²(P_m, G_{σ²}) = mean(x²) − 2σ Σ x₍ᵢ₎ (g[i] − g[i−1]) + σ²`,
/// and a bootstrap resample only changes which blocks of `g` each order
/// statistic spans.
#[derive(Debug, Clone)]
pub struct GaussianGrid {
    g: Vec<f64>,
}

impl GaussianGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return domain("grid needs m >= 1");
        }
        let mut g = vec![0.0; m + 1];
        for (i, slot) in g.iter_mut().enumerate().take(m).skip(1) {
            *slot = -normal_pdf(normal_quantile(i as f64 / m as f64)?);
        }
        Ok(Self { g })
    }

    pub fn len(&self) -> usize {
        self.g.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `W₂²` of the sorted sample against `G_{σ²}`.
    pub fn w2_sq(&self, sorted: &[f64], sigma2: f64) -> f64 {
        assert_eq!(sorted.len(), self.len());
        let sigma = sigma2.sqrt();
        let m = sorted.len() as f64;
        let mut sq = NeumaierSum::default();
        let mut cross = NeumaierSum::default();
        for (i, &x) in sorted.iter().enumerate() {
            sq.add(x * x);
            cross.add(x * (self.g[i + 1] - self.g[i]));
        }
        (sq.value() / m - 2.0 * sigma * cross.value() + sigma2).max(0.0)
    }

    /// `W₂²` of the resample that holds `counts[j]` copies of `sorted[j]`.
    pub fn w2_sq_counts(&self, sorted: &[f64], counts: &[u32], sigma2: f64) -> f64 {
        let sigma = sigma2.sqrt();
        let m = self.len() as f64;
        let mut sq = NeumaierSum::default();
        let mut cross = NeumaierSum::default();
        let mut at = 0usize;
        for (&x, &c) in sorted.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            let next = at + c as usize;
            sq.add(c as f64 * x * x);
            cross.add(x * (self.g[next] - self.g[at]));
            at = next;
        }
        (sq.value() / m - 2.0 * sigma * cross.value() + sigma2).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W2Estimate {
    pub w2: f64,
    /// Bootstrap standard error.
    pub se: f64,
    /// `W₂` on the first quarter of the sample minus `W₂` on all of it.
    pub bias_proxy: f64,
}

/// Options shared by the pooled estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledOptions {
    pub bootstrap: usize,
    /// Subtract the sample mean first (for estimated centerings).
    pub recenter: bool,
}

impl Default for PooledOptions {
    fn default() -> Self {
        Self { bootstrap: DEFAULT_BOOTSTRAP, recenter: false }
    }
}

/// `W₂(P_m, G_{σ²})` of the scaled sample with a bootstrap standard error;
/// `coords` keys the bootstrap streams.
pub fn w2_of_sample(values: &[f64], sigma2: f64, opts: PooledOptions, seed: u64, coords: &[u64]) -> Result<W2Estimate> {
    let m = values.len();
    if m < 4 {
        return domain("W2 estimate needs at least 4 samples");
    }
    let mut x = values.to_vec();
    if opts.recenter {
        let mean = crate::numeric::sum(&x) / m as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    }
    let mut quarter = x[..m / 4].to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    quarter.sort_by(|a, b| a.total_cmp(b));
    let grid = GaussianGrid::new(m)?;
    let w2 = grid.w2_sq(&x, sigma2).sqrt();
    let w2_quarter = GaussianGrid::new(quarter.len())?.w2_sq(&quarter, sigma2).sqrt();
    let boots: Vec<f64> = (0..opts.bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut key = vec![tag::BOOTSTRAP];
            key.extend_from_slice(coords);
            key.push(b as u64);
            let mut rng = stream_rng(seed, &key);
            let mut counts = vec![0u32; m];
            for _ in 0..m {
                counts[rng.random_range(0..m)] += 1;
            }
            grid.w2_sq_counts(&x, &counts, sigma2).sqrt()
        })
        .collect();
    let se = if boots.len() >= 2 {
        let (_, se_mean) = crate::numeric::mean_and_se(&boots);
        se_mean * (boots.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(W2Estimate { w2, se, bias_proxy: w2_quarter - w2 })
}

/// `W₂(P_{S_n/√n}, G_{σ²})` from `m` pooled stationary paths.
pub fn estimate_w2(model: &ProcessModel, n: usize, m: usize, sigma2: f64, seed: u64) -> Result<W2Estimate> {
    let sampler = model.sampler()?;
    let opts = PooledOptions { recenter: !sampler.meta().centering_exact, ..Default::default() };
    estimate_w2_grid(&sampler, &[n], m, &[sigma2], seed, opts).map(|v| v[0])
}

/// Unconditional estimates on a grid of `n` from one set of paths (prefix sums).
pub fn estimate_w2_grid(
    sampler: &Sampler,
    grid: &[usize],
    m: usize,
    sigma2: &[f64],
    seed: u64,
    opts: PooledOptions,
) -> Result<Vec<W2Estimate>> {
    if m < MIN_POOLED {
        return domain(format!("pooled sample count must be at least {MIN_POOLED}, got {m}"));
    }
    if sigma2.len() != grid.len() || sigma2.iter().any(|s| !(*s >= 0.0)) {
        return domain("one nonnegative sigma2 per grid point is required");
    }
    let sums = simulate_sums(sampler, grid, m, seed, &[tag::SUMS])?;
    grid.iter()
        .zip(sums.iter())
        .zip(sigma2)
        .map(|((&n, s), &s2)| {
            let scaled: Vec<f64> = s.iter().map(|v| v / (n as f64).sqrt()).collect();
            w2_of_sample(&scaled, s2, opts, seed, &[n as u64])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalW2Estimate {
    /// Mean over initial states of `W₂²(P_{S_n/√n | ξ₀}, G_{σ²})`.
    pub value: f64,
    pub se: f64,
    pub states: usize,
    pub paths: usize,
}

/// Stratified estimate of `E W₂²(P_{S_n/√n | F₀}, G_{σ²})` on a grid.
pub fn estimate_conditional_w2_grid(
    sampler: &Sampler,
    grid: &[usize],
    states: usize,
    paths: usize,
    sigma2: &[f64],
    seed: u64,
) -> Result<Vec<ConditionalW2Estimate>> {
    if paths < MIN_POOLED {
        return domain(format!("paths per state must be at least {MIN_POOLED}, got {paths}"));
    }
    if states < 2 {
        return domain("conditional estimate needs at least two initial states");
    }
    let grids = GaussianGrid::new(paths)?;
    let per_state: Vec<Vec<f64>> = (0..states)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let mut rng = stream_rng(seed, &[tag::CONDITIONAL, s as u64]);
            let start = sampler.draw_state(&mut rng);
            let sums = conditional_sums(sampler, grid, start, paths, seed, &[tag::CONDITIONAL, s as u64, 1])?;
            Ok(grid
                .iter()
                .zip(sums)
                .zip(sigma2)
                .map(|((&n, mut v), &s2)| {
                    let r = (n as f64).sqrt();
                    v.iter_mut().for_each(|x| *x /= r);
                    v.sort_by(|a, b| a.total_cmp(b));
                    grids.w2_sq(&v, s2)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..grid.len())
        .map(|g| {
            let col: Vec<f64> = per_state.iter().map(|v| v[g]).collect();
            let (value, se) = crate::numeric::mean_and_se(&col);
            ConditionalW2Estimate { value, se, states, paths }
        })
        .collect())
}

pub fn estimate_conditional_w2(
    model: &ProcessModel,
    n: usize,
    states: usize,
    paths: usize,
    sigma2: f64,
    seed: u64,
) -> Result<ConditionalW2Estimate> {
    if !model.supports_conditioning() {
        return Err(Error::NotApplicable(format!("conditional W2 is not defined for {}", model.name())));
    }
    let sampler = model.sampler()?;
    estimate_conditional_w2_grid(&sampler, &[n], states, paths, &[sigma2], seed).map(|v| v[0])
}

/// Kolmogorov distance of a sample to `Φ`, handling ties.
pub fn ks_to_normal(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let phi = normal_cdf(sorted[i]);
        worst = worst.max((i as f64 / m - phi).abs()).max((j as f64 / m - phi).abs());
        i = j;
    }
    worst
}

/// Half-width of the DKW band at level `1 − δ`.
pub fn dkw_band(m: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * m as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerryEsseenMc {
    pub delta_n: f64,
    pub dkw_band: f64,
    pub sigma_n: f64,
    /// Whether `σ_n` is exact.
    pub sigma_exact: bool,
}

pub fn berry_esseen_from_sums(sums: &[f64], sigma_n: f64, sigma_exact: bool, recenter: bool) -> Result<BerryEsseenMc> {
    if !(sigma_n > 0.0) {
        return Err(Error::Precondition("degenerate variance: sigma_n = 0".into()));
    }
    let mean = if recenter { crate::numeric::sum(sums) / sums.len() as f64 } else { 0.0 };
    let mut z: Vec<f64> = sums.iter().map(|s| (s - mean) / sigma_n).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    Ok(BerryEsseenMc { delta_n: ks_to_normal(&z), dkw_band: dkw_band(sums.len(), 0.01), sigma_n, sigma_exact })
}

/// `sup_x |P_m(S_n/σ_n ≤ x) − Φ(x)|` with the 99% DKW band; `σ_n` is exact
/// where the covariances are known, else the sample standard deviation.
pub fn berry_esseen_mc(model: &ProcessModel, n: usize, m: usize, seed: u64) -> Result<BerryEsseenMc> {
    let sampler = model.sampler()?;
    let sums = simulate_sums(&sampler, &[n], m, seed, &[tag::BERRY_ESSEEN])?;
    let (sigma_n, exact) = match var_sn(model, n) {
        Ok(v) => (v.sqrt(), true),
        Err(Error::NotApplicable(_)) => {
            let (_, se) = crate::numeric::mean_and_se(&sums[0]);
            (se * (m as f64).sqrt(), false)
        }
        Err(e) => return Err(e),
    };
    berry_esseen_from_sums(&sums[0], sigma_n, exact, !sampler.meta().centering_exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sigma2Plugin {
    pub value: f64,
    /// `2 Σ_{T<k≤2T} γ̂_k`, the next block of the series.
    pub tail: f64,
    pub truncation: usize,
    pub length: usize,
}

/// Plug-in `σ̂² = γ̂₀ + 2 Σ_{k≤T} γ̂_k` from one long stationary path.
pub fn sigma2_plugin(model: &ProcessModel, truncation: usize, length: usize, seed: u64) -> Result<Sigma2Plugin> {
    if truncation == 0 || length <= 4 * truncation {
        return domain("plug-in variance needs truncation >= 1 and a path longer than 4 T");
    }
    let mut x = crate::processes::sample_path(model, length, seed)?;
    let mean = crate::numeric::sum(&x) / length as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let gamma: Vec<f64> = (0..=2 * truncation)
        .into_par_iter()
        .map(|k| {
            let mut acc = NeumaierSum::default();
            for i in 0..length - k {
                acc.add(x[i] * x[i + k]);
            }
            acc.value() / length as f64
        })
        .collect();
    let head: f64 = gamma[0] + 2.0 * gamma[1..=truncation].iter().sum::<f64>();
    let tail = 2.0 * gamma[truncation + 1..].iter().sum::<f64>();
    Ok(Sigma2Plugin { value: head.max(0.0), tail, truncation, length })
}

/// Generalized inverse `inf{x : F_m(x) ≥ u}` of a sorted sample.
pub fn empirical_quantile(sorted: &[f64], u: f64) -> f64 {
    let m = sorted.len();
    let idx = ((u * m as f64).ceil() as usize).clamp(1, m);
    sorted[idx - 1]
}

/// `(1/u) ∫₀ᵘ F_m^{-1}(1−t) dt` of a sorted sample.
pub fn empirical_superquantile(sorted: &[f64], u: f64) -> f64 {
    let m = sorted.len() as f64;
    let mut remaining = u;
    let mut acc = NeumaierSum::default();
    for &x in sorted.iter().rev() {
        let take = (1.0 / m).min(remaining);
        acc.add(take * x);
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc.value() / u
}
