//! Browser bindings for three exact or cheap computations:
//! the exact `W₂²` curve of a lattice Markov chain, the quantile-gap
//! inequality scan for `S_n/σ_n`, and an orbit histogram of the LSV map.
//!
//! Each binding is a thin wrapper over a plain function returning a flat
//! `Vec<f64>`, so the logic is testable off the browser.

use cltlab::oracle::{conditional_sn_law, exact_w2_from_law, Sigma2Choice};
use cltlab::processes::seed::stream_rng;
use cltlab::processes::{FiniteMarkovSpec, LsvMap, LsvObservable, LsvSpec};
use cltlab::transport::verify_prop_quantile;
use wasm_bindgen::prelude::*;

/// Largest `n` the page may ask for; keeps the DP interactive.
pub const MAX_N: usize = 4096;
const MAX_LSV_STEPS: usize = 50_000_000;

fn chain(transition: &[f64], observable: &[f64]) -> Result<FiniteMarkovSpec, String> {
    let s = observable.len();
    if s == 0 || transition.len() != s * s {
        return Err(format!("transition needs {} entries for {s} states, got {}", s * s, transition.len()));
    }
    let rows = transition.chunks(s).map(<[f64]>::to_vec).collect();
    FiniteMarkovSpec::new(rows, observable.to_vec()).map_err(|e| e.to_string())
}

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be in 1..={MAX_N}, got {n}"));
    }
    Ok(())
}

/// `[n, conditional, unconditional, σ²]` rows for `n = 1, 2, 4, …, n_max`,
/// against the long-run variance.
pub fn w2_curve(transition: &[f64], observable: &[f64], n_max: usize) -> Result<Vec<f64>, String> {
    check_n(n_max)?;
    let spec = chain(transition, observable)?;
    let mut out = Vec::new();
    let mut n = 1;
    while n <= n_max {
        let law = conditional_sn_law(&spec, n).map_err(|e| e.to_string())?;
        let w = exact_w2_from_law(&spec, &law, Sigma2Choice::Exact).map_err(|e| e.to_string())?;
        out.extend([n as f64, w.conditional, w.unconditional, w.sigma2]);
        n *= 2;
    }
    Ok(out)
}

/// `[u, lhs, rhs, violated]` rows of the quantile-gap inequality for
/// `Z = S_n/σ_n` on an even grid of `levels` points in `(0, 1/2]`.
pub fn quantile_scan(transition: &[f64], observable: &[f64], n: usize, p: u32, levels: usize) -> Result<Vec<f64>, String> {
    check_n(n)?;
    if !(1..=1000).contains(&levels) {
        return Err(format!("levels must be in 1..=1000, got {levels}"));
    }
    let spec = chain(transition, observable)?;
    let law = conditional_sn_law(&spec, n).map_err(|e| e.to_string())?;
    let var = law.unconditional.variance();
    if var.is_nan() || var <= 0.0 {
        return Err("degenerate sum: Var S_n = 0".into());
    }
    let z = law.unconditional.scaled(1.0 / var.sqrt()).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (1..=levels).map(|i| 0.5 * i as f64 / levels as f64).collect();
    let rows = verify_prop_quantile(&z, &grid, p).map_err(|e| e.to_string())?;
    Ok(rows.iter().flat_map(|r| [r.u, r.lhs, r.rhs, r.violated as u8 as f64]).collect())
}

/// Normalized histogram (density per bin) of one orbit of the LSV map.
pub fn lsv_orbit_histogram(gamma: f64, steps: usize, bins: usize, seed: u64) -> Result<Vec<f64>, String> {
    if steps == 0 || steps > MAX_LSV_STEPS {
        return Err(format!("steps must be in 1..={MAX_LSV_STEPS}"));
    }
    if bins == 0 || bins > 10_000 {
        return Err("bins must be in 1..=10000".into());
    }
    let spec = LsvSpec {
        gamma,
        observable: LsvObservable::Identity,
        burn_in: 10_000,
        centering_steps: 1000,
    };
    let map = LsvMap::new(&spec).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(seed, &[]);
    let mut x = map.stationary_start(&mut rng);
    let mut counts = vec![0u64; bins];
    for _ in 0..steps {
        x = map.advance(x, &mut rng);
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let scale = bins as f64 / steps as f64;
    Ok(counts.into_iter().map(|c| c as f64 * scale).collect())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = w2Curve)]
pub fn w2_curve_js(transition: &[f64], observable: &[f64], n_max: usize) -> Result<Vec<f64>, JsValue> {
    js(w2_curve(transition, observable, n_max))
}

#[wasm_bindgen(js_name = quantileScan)]
pub fn quantile_scan_js(transition: &[f64], observable: &[f64], n: usize, p: u32, levels: usize) -> Result<Vec<f64>, JsValue> {
    js(quantile_scan(transition, observable, n, p, levels))
}

#[wasm_bindgen(js_name = lsvHistogram)]
pub fn lsv_histogram_js(gamma: f64, steps: usize, bins: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    js(lsv_orbit_histogram(gamma, steps, bins, seed))
}
