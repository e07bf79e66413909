use cltlab::coefficients::{sigma2_exact, var_sn};
use cltlab::harness::{
    berry_esseen_mc, estimate_conditional_w2, estimate_w2, estimate_w2_grid, fit_rate, PooledOptions,
};
use cltlab::oracle::{exact_berry_esseen, exact_w2, Sigma2Choice};
use cltlab::processes::{FiniteMarkovSpec, GaussianSpec, IidSpec, ProcessModel};

fn three_state() -> FiniteMarkovSpec {
    FiniteMarkovSpec::new(vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]], vec![-1.0, 0.0, 2.0])
        .unwrap()
}

#[test]
fn pooled_estimate_matches_oracle() {
    let spec = three_state();
    let model = ProcessModel::FiniteMarkov(spec.clone());
    let s2 = sigma2_exact(&model).unwrap();
    for &n in &[4usize, 16] {
        let exact = exact_w2(&spec, n, Sigma2Choice::Exact).unwrap().unconditional.sqrt();
        let est = estimate_w2(&model, n, 100_000, s2, 31).unwrap();
        assert!((est.w2 - exact).abs() <= 3.0 * (est.se + est.bias_proxy.abs()), "n={n}: {est:?} vs {exact}");
    }
}

#[test]
fn calibration_over_seeds() {
    // large signal, so the empirical floor is second order
    let spec = three_state();
    let model = ProcessModel::FiniteMarkov(spec.clone());
    let s2 = sigma2_exact(&model).unwrap();
    let n = 4;
    let exact = exact_w2(&spec, n, Sigma2Choice::Exact).unwrap().unconditional.sqrt();
    let sampler = model.sampler().unwrap();
    let opts = PooledOptions { bootstrap: 100, recenter: false };
    let mut hits = 0;
    for seed in 0..100 {
        let e = estimate_w2_grid(&sampler, &[n], 4000, &[s2], seed, opts).unwrap()[0];
        hits += ((e.w2 - exact).abs() <= 3.0 * e.se) as usize;
    }
    assert!(hits >= 95, "coverage {hits}/100");
}

#[test]
fn gaussian_floor_shrinks_with_m() {
    let model = ProcessModel::IidGaussian(GaussianSpec { variance: 1.0 });
    let small: f64 = (0..5).map(|s| estimate_w2(&model, 8, 1000, 1.0, s).unwrap().w2).sum::<f64>() / 5.0;
    let large: f64 = (0..5).map(|s| estimate_w2(&model, 8, 64_000, 1.0, s).unwrap().w2).sum::<f64>() / 5.0;
    assert!(large < small / 3.0, "{small} -> {large}");
    // √(log M / M) scale
    assert!(large < 4.0 * (64_000f64.ln() / 64_000.0).sqrt());
}

#[test]
fn conditional_estimate_matches_oracle() {
    let spec = three_state();
    let model = ProcessModel::FiniteMarkov(spec.clone());
    let s2 = sigma2_exact(&model).unwrap();
    let n = 8;
    let exact = exact_w2(&spec, n, Sigma2Choice::Exact).unwrap().conditional;
    let est = estimate_conditional_w2(&model, n, 96, 4000, s2, 5).unwrap();
    // the per-state empirical floor is about E W₂²(G_R, G) ≲ 2 log R / R
    let budget = 3.0 * est.se + 2.0 * (4000f64).ln() / 4000.0 * s2;
    assert!((est.value - exact).abs() <= budget, "{est:?} vs {exact}");
}

#[test]
fn conditioning_is_vacuous_for_iid_rows() {
    let spec = FiniteMarkovSpec::iid_rows(vec![0.3, 0.7], vec![-1.0, 1.0]).unwrap();
    let model = ProcessModel::FiniteMarkov(spec.clone());
    let s2 = sigma2_exact(&model).unwrap();
    let cond = estimate_conditional_w2(&model, 8, 32, 4000, s2, 9).unwrap();
    let unc = estimate_w2(&model, 8, 100_000, s2, 9).unwrap();
    let exact = exact_w2(&spec, 8, Sigma2Choice::Exact).unwrap();
    assert!((exact.conditional - exact.unconditional).abs() < 1e-14);
    // the conditional estimator carries the floor of R = 4000 paths
    let floor = 2.0 * (4000f64).ln() / 4000.0 * s2;
    assert!((cond.value - unc.w2 * unc.w2).abs() <= 2.0 * cond.se + floor, "{cond:?} vs {unc:?}");
}

#[test]
fn non_markov_conditioning_rejected() {
    let m = ProcessModel::LsvMap(cltlab::processes::LsvSpec::new(0.1, cltlab::processes::LsvObservable::Identity));
    assert!(estimate_conditional_w2(&m, 8, 4, 1000, 1.0, 0).is_err());
}

#[test]
fn berry_esseen_mc_within_band() {
    let model = ProcessModel::FiniteMarkov(three_state());
    for &n in &[8usize, 64] {
        let mc = berry_esseen_mc(&model, n, 50_000, 2).unwrap();
        let exact = exact_berry_esseen(&model, n).unwrap();
        assert!((mc.delta_n - exact).abs() <= mc.dkw_band, "n={n}");
        assert!(mc.sigma_exact);
    }
    let g = ProcessModel::IidGaussian(GaussianSpec { variance: 2.0 });
    let mc = berry_esseen_mc(&g, 16, 50_000, 3).unwrap();
    assert!(mc.delta_n <= mc.dkw_band);
}

#[test]
fn berry_esseen_decreases_in_n() {
    let model = ProcessModel::FiniteMarkov(three_state());
    let d: Vec<f64> = [4usize, 16, 64, 256].iter().map(|&n| berry_esseen_mc(&model, n, 50_000, 4).unwrap().delta_n).collect();
    let inversions = d.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "{d:?}");
}

#[test]
fn degenerate_variance_reported() {
    let zero = ProcessModel::IidBounded(IidSpec { values: vec![1.0], probs: vec![1.0] });
    assert_eq!(var_sn(&zero, 4).unwrap(), 0.0);
    assert!(berry_esseen_mc(&zero, 4, 1000, 0).is_err());
}

#[test]
fn synthetic_rate_fits() {
    let pts: Vec<(f64, f64)> = (4..=12).map(|e| {
        let n = (1u64 << e) as f64;
        let wiggle = 1.0 + 0.01 * ((e * 7919) % 13) as f64 / 13.0;
        (n, wiggle / n)
    }).collect();
    let f = fit_rate(&pts).unwrap();
    assert!(f.ci95.0 <= -1.0 && -1.0 <= f.ci95.1, "{f:?}");
}
