//! Experiment battery and report files.

use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::coefficients::{
    sigma2_exact, theta_circle_first, theta_mc, var_sn, CoefficientRow, CoefficientTable, Estimator, CoefficientKind,
    TupleMode,
};
use crate::error::{Error, Result};
use crate::gaussian::{normal_quantile, superquantile};
use crate::oracle::{
    berry_esseen_from_law, conditional_sn_law, exact_w2_from_law, quantile_gaps_from_law, superquantile_gaps_from_law,
    Sigma2Choice,
};
use crate::processes::seed::{splitmix64, stream_id, tag};
use crate::processes::{simulate_sums, ProcessModel, SamplerMeta};

use super::config::{Checks, ExperimentConfig, Sigma2Source, SlopeRange};
use super::estimate::{
    berry_esseen_from_sums, empirical_quantile, empirical_superquantile, estimate_conditional_w2_grid, sigma2_plugin,
    w2_of_sample, PooledOptions,
};
use super::rate::{fit_rate, RateFit};

pub const SCHEMA_VERSION: u32 = 1;
const PLUGIN_TRUNCATION: usize = 64;
const NOT_APPLICABLE: &str = "not applicable";

/// Seed of replicate `r`; replicate 0 runs on the master seed itself.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    if r == 0 {
        seed
    } else {
        splitmix64(seed ^ stream_id(&[tag::REPLICATE, r as u64]))
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sigma2Info {
    pub value: f64,
    /// `exact`, `estimated` or `known`.
    pub method: &'static str,
    pub tail: Option<f64>,
    pub truncation: Option<usize>,
}

/// Resolves the configured `σ²`.
pub fn resolve_sigma2(cfg: &ExperimentConfig) -> Result<Sigma2Info> {
    let estimated = |t: usize| -> Result<Sigma2Info> {
        let p = sigma2_plugin(&cfg.model, t, cfg.sigma2_path_length, cfg.seed ^ stream_id(&[tag::VARIANCE]))?;
        Ok(Sigma2Info { value: p.value, method: "estimated", tail: Some(p.tail), truncation: Some(t) })
    };
    let exact = |v| Sigma2Info { value: v, method: "exact", tail: None, truncation: None };
    match cfg.sigma2_source {
        Sigma2Source::Known(v) => Ok(Sigma2Info { value: v, method: "known", tail: None, truncation: None }),
        Sigma2Source::Exact => sigma2_exact(&cfg.model).map(exact),
        Sigma2Source::Estimated { truncation } => estimated(truncation),
        Sigma2Source::Auto => match sigma2_exact(&cfg.model) {
            Ok(v) => Ok(exact(v)),
            Err(Error::NotApplicable(_)) => estimated(PLUGIN_TRUNCATION),
            Err(e) => Err(e),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W2Row {
    pub n: usize,
    /// `W₂(P_{S_n/√n}, G_{σ²})`
    pub w2: f64,
    pub se: f64,
    /// Same against `G_{σ_n²/n}`.
    pub w2_sigma_n: f64,
    pub se_sigma_n: f64,
    pub sigma_n2_over_n: f64,
    pub sigma_n_exact: bool,
    pub bias_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondRow {
    pub n: usize,
    pub value: f64,
    pub se: f64,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeRow {
    pub n: usize,
    pub delta_n: f64,
    pub dkw_band: f64,
    pub sigma_n: f64,
    pub sigma_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub conditional: f64,
    pub unconditional: f64,
    pub berry_esseen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Done(T),
    Skipped { status: &'static str, reason: String },
}

impl<T> Section<T> {
    fn skipped(reason: impl Into<String>) -> Self {
        Section::Skipped { status: NOT_APPLICABLE, reason: reason.into() }
    }

    pub fn done(&self) -> Option<&T> {
        match self {
            Section::Done(t) => Some(t),
            Section::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fits {
    pub w2: Option<RateFit>,
    pub w2_sigma_n: Option<RateFit>,
    pub cond_w2: Option<RateFit>,
    pub oracle_cond_w2: Option<RateFit>,
    pub be: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub schema_version: u32,
    pub model: &'static str,
    pub seed: u64,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub pooled_samples: usize,
    pub sampler: SamplerMeta,
    pub sigma2: Sigma2Info,
    pub w2: Vec<W2Row>,
    pub conditional_w2: Section<Vec<CondRow>>,
    pub berry_esseen: Vec<BeRow>,
    pub oracle: Section<Vec<OracleRow>>,
    pub coefficients: Section<String>,
    pub fits: Fits,
    /// `W₂` at the largest `n` is within three bias proxies of the floor.
    pub bias_dominated: bool,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn fit_of<T>(rows: &[T], f: impl Fn(&T) -> (f64, f64)) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = rows.iter().map(f).collect();
    fit_rate(&pts).ok()
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

struct Pooled {
    w2: Vec<W2Row>,
    be: Vec<BeRow>,
    /// Standardized sorted sums of replicate 0, per grid point.
    standardized: Vec<Vec<f64>>,
}

fn pooled_section(cfg: &ExperimentConfig, sigma2: f64) -> Result<Pooled> {
    let sampler = cfg.model.sampler()?;
    let recenter = !sampler.meta().centering_exact;
    let opts = PooledOptions { bootstrap: cfg.bootstrap, recenter };
    let exact_var: Vec<Option<f64>> = cfg
        .n_grid
        .iter()
        .map(|&n| match var_sn(&cfg.model, n) {
            Ok(v) => Ok(Some(v)),
            Err(Error::NotApplicable(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let g = cfg.n_grid.len();
    let mut per_rep: Vec<Vec<(f64, f64, f64, f64, f64, f64)>> = Vec::with_capacity(cfg.replicates);
    let mut be = Vec::new();
    let mut standardized = Vec::new();
    for r in 0..cfg.replicates {
        let rseed = replicate_seed(cfg.seed, r);
        let sums = simulate_sums(&sampler, &cfg.n_grid, cfg.pooled_samples, rseed, &[tag::SUMS])?;
        let mut rows = Vec::with_capacity(g);
        for (gi, (&n, s)) in cfg.n_grid.iter().zip(&sums).enumerate() {
            let root = (n as f64).sqrt();
            let scaled: Vec<f64> = s.iter().map(|v| v / root).collect();
            let sample_var = {
                let mean = if recenter { crate::numeric::sum(&scaled) / scaled.len() as f64 } else { 0.0 };
                let sq: Vec<f64> = scaled.iter().map(|x| (x - mean) * (x - mean)).collect();
                crate::numeric::sum(&sq) / (scaled.len() as f64 - 1.0)
            };
            let sn2 = exact_var[gi].map(|v| v / n as f64).unwrap_or(sample_var);
            let a = w2_of_sample(&scaled, sigma2, opts, rseed, &[n as u64, 0])?;
            let b = w2_of_sample(&scaled, sn2, opts, rseed, &[n as u64, 1])?;
            rows.push((a.w2, a.se, b.w2, b.se, sn2, a.bias_proxy));
            if r == 0 {
                let sigma_n = (sn2 * n as f64).sqrt();
                let mc = berry_esseen_from_sums(s, sigma_n, exact_var[gi].is_some(), recenter)?;
                be.push(BeRow { n, delta_n: mc.delta_n, dkw_band: mc.dkw_band, sigma_n, sigma_exact: mc.sigma_exact });
                let mean = if recenter { crate::numeric::sum(s) / s.len() as f64 } else { 0.0 };
                let mut z: Vec<f64> = s.iter().map(|v| (v - mean) / sigma_n).collect();
                z.sort_by(|a, b| a.total_cmp(b));
                standardized.push(z);
            }
        }
        per_rep.push(rows);
    }
    let reps = cfg.replicates as f64;
    let w2 = (0..g)
        .map(|gi| {
            let col = |k: usize| -> Vec<f64> {
                per_rep
                    .iter()
                    .map(|r| {
                        let t = r[gi];
                        [t.0, t.1, t.2, t.3, t.4, t.5][k]
                    })
                    .collect()
            };
            let mean = |k| crate::numeric::sum(&col(k)) / reps;
            // one replicate: bootstrap; several: spread of the replicate means
            let se = |k: usize, boot: usize| {
                if cfg.replicates > 1 {
                    crate::numeric::mean_and_se(&col(k)).1
                } else {
                    col(boot)[0]
                }
            };
            W2Row {
                n: cfg.n_grid[gi],
                w2: mean(0),
                se: se(0, 1),
                w2_sigma_n: mean(2),
                se_sigma_n: se(2, 3),
                sigma_n2_over_n: mean(4),
                sigma_n_exact: exact_var[gi].is_some(),
                bias_proxy: mean(5),
            }
        })
        .collect();
    Ok(Pooled { w2, be, standardized })
}

fn conditional_section(cfg: &ExperimentConfig, sigma2: f64) -> Result<Section<Vec<CondRow>>> {
    if !cfg.model.supports_conditioning() {
        return Ok(Section::skipped(format!("{} has no finite-dimensional past to condition on", cfg.model.name())));
    }
    let sampler = cfg.model.sampler()?;
    let sig = vec![sigma2; cfg.n_grid.len()];
    let est = estimate_conditional_w2_grid(
        &sampler,
        &cfg.n_grid,
        cfg.conditional.states,
        cfg.conditional.paths,
        &sig,
        cfg.seed,
    )?;
    let rows = cfg
        .n_grid
        .iter()
        .zip(est)
        .map(|(&n, e)| {
            let exact = match &cfg.model {
                ProcessModel::FiniteMarkov(spec) if n <= *cfg.oracle_grid.last().unwrap() => {
                    let law = conditional_sn_law(spec, n)?;
                    Some(exact_w2_from_law(spec, &law, Sigma2Choice::Value(sigma2))?.conditional)
                }
                _ => None,
            };
            Ok(CondRow { n, value: e.value, se: e.se, exact })
        })
        .collect::<Result<_>>()?;
    Ok(Section::Done(rows))
}

struct OracleOut {
    rows: Vec<OracleRow>,
    /// `(n, u, gap)` for quantiles and superquantiles.
    quantiles: Vec<(usize, f64, f64)>,
    superquantiles: Vec<(usize, f64, f64)>,
}

fn oracle_section(cfg: &ExperimentConfig) -> Result<Option<OracleOut>> {
    let ProcessModel::FiniteMarkov(spec) = &cfg.model else { return Ok(None) };
    let mut out = OracleOut { rows: vec![], quantiles: vec![], superquantiles: vec![] };
    for &n in &cfg.oracle_grid {
        let law = conditional_sn_law(spec, n)?;
        let w = exact_w2_from_law(spec, &law, Sigma2Choice::Exact)?;
        out.rows.push(OracleRow {
            n,
            conditional: w.conditional,
            unconditional: w.unconditional,
            berry_esseen: berry_esseen_from_law(&law)?,
        });
        for (u, gap, _) in quantile_gaps_from_law(&law, &cfg.quantile_levels)?.rows {
            out.quantiles.push((n, u, gap));
        }
        for (u, gap) in superquantile_gaps_from_law(&law, &cfg.superquantile_levels)? {
            out.superquantiles.push((n, u, gap));
        }
    }
    Ok(Some(out))
}

fn coefficient_tables(cfg: &ExperimentConfig) -> Result<std::result::Result<Vec<CoefficientTable>, String>> {
    let c = &cfg.coefficients;
    let tables = match &cfg.model {
        ProcessModel::FiniteMarkov(spec) => vec![
            CoefficientTable::theta_exact(spec, &c.lags, 1, 2, c.window, TupleMode::Gamma)?,
            CoefficientTable::alpha_dep(spec, &c.lags, 1, c.window)?,
            CoefficientTable::tau_restricted(spec, &c.lags, 1.0, 1, c.window)?,
        ],
        ProcessModel::CircleWalk(spec) => {
            let rows = c
                .lags
                .iter()
                .map(|&k| Ok(CoefficientRow { k, value: theta_circle_first(spec, k, c.window, 4096)?.value, stderr: None }))
                .collect::<Result<_>>()?;
            vec![CoefficientTable {
                kind: CoefficientKind::Theta { p: 1, q: 1 },
                estimator: Estimator::Exact,
                window: c.window,
                rows,
            }]
        }
        m if m.supports_conditioning() => {
            let rows = c
                .lags
                .iter()
                .map(|&k| {
                    let t = theta_mc(m, k, 1, 1, c.window, c.mc_states, c.mc_paths, cfg.seed, TupleMode::Gamma)?;
                    Ok(CoefficientRow { k, value: t.value, stderr: Some(t.se) })
                })
                .collect::<Result<_>>()?;
            vec![CoefficientTable {
                kind: CoefficientKind::Theta { p: 1, q: 1 },
                estimator: Estimator::MonteCarlo { replicates: c.mc_paths },
                window: c.window,
                rows,
            }]
        }
        m => return Ok(Err(format!("conditional expectations of {} are not computable", m.name()))),
    };
    Ok(Ok(tables))
}

fn check(name: &'static str, range: Option<SlopeRange>, fit: Option<&RateFit>) -> Option<CheckResult> {
    let r = range?;
    let value = fit.map(|f| f.slope);
    Some(CheckResult { name, min: r.min, max: r.max, value, passed: value.is_some_and(|v| r.contains(v)) })
}

fn evaluate_checks(checks: Checks, fits: &Fits) -> Vec<CheckResult> {
    [
        check("w2_slope", checks.w2_slope, fits.w2.as_ref()),
        check("cond_w2_slope", checks.cond_w2_slope, fits.cond_w2.as_ref()),
        check("oracle_cond_w2_slope", checks.oracle_cond_w2_slope, fits.oracle_cond_w2.as_ref()),
        check("be_slope", checks.be_slope, fits.be.as_ref()),
    ]
    .into_iter()
    .flatten()
    .collect()
}

/// Runs the configured battery and writes `w2.csv`, `cond_w2.csv`, `be.csv`,
/// `quantile.csv`, `coefficients.csv`, `oracle.csv` (lattice chains) and
/// `summary.json` into `cfg.outputs`.
pub fn run_report(cfg: &ExperimentConfig) -> Result<ReportSummary> {
    cfg.validate()?;
    let dir = cfg.outputs.as_path();
    std::fs::create_dir_all(dir)?;
    let sampler = cfg.model.sampler()?;
    let sigma2 = resolve_sigma2(cfg)?;

    let pooled = pooled_section(cfg, sigma2.value)?;
    let mut w = csv_writer(dir, "w2.csv")?;
    w.write_record(["n", "w2", "se", "w2_sigma_n", "se_sigma_n", "sigma_n2_over_n", "sigma_n_exact", "bias_proxy"])?;
    for r in &pooled.w2 {
        w.write_record([
            r.n.to_string(),
            fmt(r.w2),
            fmt(r.se),
            fmt(r.w2_sigma_n),
            fmt(r.se_sigma_n),
            fmt(r.sigma_n2_over_n),
            r.sigma_n_exact.to_string(),
            fmt(r.bias_proxy),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "be.csv")?;
    w.write_record(["n", "delta_n", "dkw_band", "sigma_n", "sigma_exact"])?;
    for r in &pooled.be {
        w.write_record([r.n.to_string(), fmt(r.delta_n), fmt(r.dkw_band), fmt(r.sigma_n), r.sigma_exact.to_string()])?;
    }
    w.flush()?;

    let conditional = conditional_section(cfg, sigma2.value)?;
    match &conditional {
        Section::Done(rows) => {
            let mut w = csv_writer(dir, "cond_w2.csv")?;
            w.write_record(["n", "value", "se", "exact"])?;
            for r in rows {
                w.write_record([r.n.to_string(), fmt(r.value), fmt(r.se), fmt_opt(r.exact)])?;
            }
            w.flush()?;
        }
        Section::Skipped { reason, .. } => {
            let mut f = BufWriter::new(File::create(dir.join("cond_w2.csv"))?);
            writeln!(f, "status,reason")?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut f);
            w.write_record([NOT_APPLICABLE, reason.as_str()])?;
            w.flush()?;
        }
    }

    let oracle = oracle_section(cfg)?;
    let mut w = csv_writer(dir, "quantile.csv")?;
    w.write_record(["source", "kind", "n", "u", "gap", "scaled_gap"])?;
    for (gi, z) in pooled.standardized.iter().enumerate() {
        let n = cfg.n_grid[gi];
        for &u in &cfg.quantile_levels {
            let gap = (empirical_quantile(z, u) - normal_quantile(u)?).abs();
            let scaled = gap * (n as f64 * u * (1.0 - u)).sqrt();
            w.write_record(["monte_carlo", "quantile", &n.to_string(), &fmt(u), &fmt(gap), &fmt(scaled)])?;
        }
        for &u in &cfg.superquantile_levels {
            let gap = (empirical_superquantile(z, u) - superquantile(u)?).abs();
            let scaled = gap * (n as f64 * u).sqrt();
            w.write_record(["monte_carlo", "superquantile", &n.to_string(), &fmt(u), &fmt(gap), &fmt(scaled)])?;
        }
    }
    if let Some(o) = &oracle {
        for &(n, u, gap) in &o.quantiles {
            let scaled = gap * (n as f64 * u * (1.0 - u)).sqrt();
            w.write_record(["exact", "quantile", &n.to_string(), &fmt(u), &fmt(gap), &fmt(scaled)])?;
        }
        for &(n, u, gap) in &o.superquantiles {
            let scaled = gap * (n as f64 * u).sqrt();
            w.write_record(["exact", "superquantile", &n.to_string(), &fmt(u), &fmt(gap), &fmt(scaled)])?;
        }
    }
    w.flush()?;

    let oracle_section = match &oracle {
        Some(o) => {
            let mut w = csv_writer(dir, "oracle.csv")?;
            w.write_record(["n", "conditional_w2_sq", "unconditional_w2_sq", "berry_esseen"])?;
            for r in &o.rows {
                w.write_record([r.n.to_string(), fmt(r.conditional), fmt(r.unconditional), fmt(r.berry_esseen)])?;
            }
            w.flush()?;
            Section::Done(o.rows.clone())
        }
        None => Section::skipped("the exact oracle needs a finite lattice chain"),
    };

    let coefficients = match coefficient_tables(cfg)? {
        Ok(tables) => {
            let f = BufWriter::new(File::create(dir.join("coefficients.csv"))?);
            let mut f = f;
            for (i, t) in tables.iter().enumerate() {
                t.write_csv(&mut f, i == 0)?;
            }
            f.flush()?;
            Section::Done("coefficients.csv".to_string())
        }
        Err(reason) => Section::skipped(reason),
    };

    let fits = Fits {
        w2: fit_of(&pooled.w2, |r| (r.n as f64, r.w2)),
        w2_sigma_n: fit_of(&pooled.w2, |r| (r.n as f64, r.w2_sigma_n)),
        cond_w2: conditional.done().and_then(|rows| fit_of(rows, |r| (r.n as f64, r.value))),
        oracle_cond_w2: oracle_section.done().and_then(|rows| fit_of(rows, |r| (r.n as f64, r.conditional))),
        be: fit_of(&pooled.be, |r| (r.n as f64, r.delta_n)),
    };
    let last = pooled.w2.last().expect("grid is nonempty");
    let bias_dominated = last.w2 <= 3.0 * last.bias_proxy.abs();
    let checks = evaluate_checks(cfg.effective_checks(), &fits);
    let passed = checks.iter().all(|c| c.passed);
    let summary = ReportSummary {
        schema_version: SCHEMA_VERSION,
        model: cfg.model.name(),
        seed: cfg.seed,
        n_grid: cfg.n_grid.clone(),
        replicates: cfg.replicates,
        pooled_samples: cfg.pooled_samples,
        sampler: sampler.meta().clone(),
        sigma2,
        w2: pooled.w2,
        conditional_w2: conditional,
        berry_esseen: pooled.be,
        oracle: oracle_section,
        coefficients,
        fits,
        bias_dominated,
        checks,
        passed,
    };
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(summary)
}
