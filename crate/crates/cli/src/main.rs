use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cltlab::coefficients::sigma2_exact;
use cltlab::harness::{
    estimate_conditional_w2_grid, estimate_w2_grid, fit_rate, resolve_sigma2, run_report, ExperimentConfig,
    PooledOptions,
};
use cltlab::oracle::{conditional_sn_law, quantile_gaps_from_law, superquantile_gaps_from_law};
use cltlab::processes::{sample_path, simulate_sums, ProcessModel};
use cltlab::transport::verify_prop_quantile;
use cltlab::{Error, Result};

#[derive(Parser)]
#[command(name = "cltlab", version, about = "Transport-cost rates in the CLT for dependent sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write one stationary path to path.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Path length (default: largest n of the grid).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Pooled W2 estimates on the grid.
    W2 {
        #[command(flatten)]
        common: Common,
    },
    /// Stratified conditional W2 estimates on the grid.
    CondW2 {
        #[command(flatten)]
        common: Common,
    },
    /// Dependence coefficient tables.
    Coeffs {
        #[command(flatten)]
        common: Common,
    },
    /// Log-log rate fit of two CSV columns.
    Rate {
        #[command(flatten)]
        common: Common,
        /// CSV file with a header row.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "w2")]
        y: String,
    },
    /// Kolmogorov distance of S_n / sigma_n to the normal law.
    Be {
        #[command(flatten)]
        common: Common,
    },
    /// Quantile-gap inequality and exact quantile gaps for lattice chains.
    QuantileCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Exact conditional laws of S_n for a lattice chain.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Full battery: CSV files plus summary.json.
    Report {
        #[command(flatten)]
        common: Common,
        /// Exit with status 4 when a slope check fails.
        #[arg(long)]
        check: bool,
    },
}

enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 3,
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config("--config <path.json> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
        other => other,
    })?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.outputs = o.clone();
    }
    Ok(cfg)
}

fn setup_threads(common: &Common) -> Result<()> {
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>> {
    std::fs::create_dir_all(dir)?;
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn print_json(v: &impl serde::Serialize) -> std::result::Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn lattice_spec(model: &ProcessModel) -> Result<&cltlab::processes::FiniteMarkovSpec> {
    match model {
        ProcessModel::FiniteMarkov(s) => Ok(s),
        m => Err(Error::NotApplicable(format!("the exact oracle needs a FiniteMarkov model, got {}", m.name()))),
    }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, n } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let n = n.unwrap_or(*cfg.n_grid.last().unwrap());
            let path = sample_path(&cfg.model, n, cfg.seed)?;
            let mut w = writer(&cfg.outputs, "path.csv")?;
            w.write_record(["k", "x"]).map_err(Error::from)?;
            for (k, x) in path.iter().enumerate() {
                w.write_record([(k + 1).to_string(), fmt(*x)]).map_err(Error::from)?;
            }
            w.flush()?;
            println!("wrote {} values to {}", n, cfg.outputs.join("path.csv").display());
        }
        Command::W2 { common } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let s2 = resolve_sigma2(&cfg)?;
            let sampler = cfg.model.sampler()?;
            let opts = PooledOptions { bootstrap: cfg.bootstrap, recenter: !sampler.meta().centering_exact };
            let sig = vec![s2.value; cfg.n_grid.len()];
            let est = estimate_w2_grid(&sampler, &cfg.n_grid, cfg.pooled_samples, &sig, cfg.seed, opts)?;
            let mut w = writer(&cfg.outputs, "w2.csv")?;
            w.write_record(["n", "w2", "se", "bias_proxy"]).map_err(Error::from)?;
            for (n, e) in cfg.n_grid.iter().zip(&est) {
                w.write_record([n.to_string(), fmt(e.w2), fmt(e.se), fmt(e.bias_proxy)]).map_err(Error::from)?;
            }
            w.flush()?;
            let pts: Vec<(f64, f64)> = cfg.n_grid.iter().zip(&est).map(|(&n, e)| (n as f64, e.w2)).collect();
            print_json(&serde_json::json!({ "sigma2": s2, "estimates": est, "fit": fit_rate(&pts).ok() }))?;
        }
        Command::CondW2 { common } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            if !cfg.model.supports_conditioning() {
                return Err(Error::NotApplicable(format!("conditional W2 is not defined for {}", cfg.model.name())).into());
            }
            let s2 = resolve_sigma2(&cfg)?;
            let sampler = cfg.model.sampler()?;
            let sig = vec![s2.value; cfg.n_grid.len()];
            let est = estimate_conditional_w2_grid(
                &sampler,
                &cfg.n_grid,
                cfg.conditional.states,
                cfg.conditional.paths,
                &sig,
                cfg.seed,
            )?;
            let mut w = writer(&cfg.outputs, "cond_w2.csv")?;
            w.write_record(["n", "value", "se"]).map_err(Error::from)?;
            for (n, e) in cfg.n_grid.iter().zip(&est) {
                w.write_record([n.to_string(), fmt(e.value), fmt(e.se)]).map_err(Error::from)?;
            }
            w.flush()?;
            print_json(&serde_json::json!({ "sigma2": s2, "estimates": est }))?;
        }
        Command::Coeffs { common } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let spec = lattice_spec(&cfg.model)?;
            let c = &cfg.coefficients;
            let window = c.window;
            let tables = [
                cltlab::coefficients::CoefficientTable::theta_exact(
                    spec,
                    &c.lags,
                    1,
                    2,
                    window,
                    cltlab::coefficients::TupleMode::Gamma,
                )?,
                cltlab::coefficients::CoefficientTable::alpha_dep(spec, &c.lags, 1, window)?,
                cltlab::coefficients::CoefficientTable::tau_restricted(spec, &c.lags, 1.0, 1, window)?,
            ];
            std::fs::create_dir_all(&cfg.outputs)?;
            let mut f = std::fs::File::create(cfg.outputs.join("coefficients.csv"))?;
            for (i, t) in tables.iter().enumerate() {
                t.write_csv(&mut f, i == 0)?;
            }
            print_json(&tables)?;
        }
        Command::Rate { common, input, x, y } => {
            setup_threads(&common)?;
            let mut rdr = csv::Reader::from_path(&input).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let headers = rdr.headers().map_err(Error::from)?.clone();
            let col = |name: &str| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Config(format!("column {name} not found in {}", input.display())))
            };
            let (ix, iy) = (col(&x)?, col(&y)?);
            let mut pts = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(Error::from)?;
                let parse = |i: usize| {
                    rec[i].trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
                };
                pts.push((parse(ix)?, parse(iy)?));
            }
            print_json(&fit_rate(&pts)?)?;
        }
        Command::Be { common } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let sampler = cfg.model.sampler()?;
            let sums = simulate_sums(
                &sampler,
                &cfg.n_grid,
                cfg.pooled_samples,
                cfg.seed,
                &[cltlab::processes::seed::tag::BERRY_ESSEEN],
            )?;
            let mut rows = Vec::new();
            let mut w = writer(&cfg.outputs, "be.csv")?;
            w.write_record(["n", "delta_n", "dkw_band", "sigma_n", "sigma_exact"]).map_err(Error::from)?;
            for (&n, s) in cfg.n_grid.iter().zip(&sums) {
                let (sigma_n, exact) = match cltlab::coefficients::var_sn(&cfg.model, n) {
                    Ok(v) => (v.sqrt(), true),
                    Err(Error::NotApplicable(_)) => {
                        let (_, se) = cltlab::numeric::mean_and_se(s);
                        (se * (s.len() as f64).sqrt(), false)
                    }
                    Err(e) => return Err(e.into()),
                };
                let mc =
                    cltlab::harness::berry_esseen_from_sums(s, sigma_n, exact, !sampler.meta().centering_exact)?;
                w.write_record([n.to_string(), fmt(mc.delta_n), fmt(mc.dkw_band), fmt(sigma_n), exact.to_string()])
                    .map_err(Error::from)?;
                rows.push(serde_json::json!({ "n": n, "result": mc }));
            }
            w.flush()?;
            let pts: Vec<(f64, f64)> =
                rows.iter().map(|r| (r["n"].as_f64().unwrap(), r["result"]["delta_n"].as_f64().unwrap())).collect();
            print_json(&serde_json::json!({ "rows": rows, "fit": fit_rate(&pts).ok() }))?;
        }
        Command::QuantileCheck { common } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let spec = lattice_spec(&cfg.model)?;
            let half: Vec<f64> = cfg.quantile_levels.iter().copied().filter(|&u| u <= 0.5).collect();
            let mut w = writer(&cfg.outputs, "quantile_check.csv")?;
            w.write_record(["n", "kind", "u", "lhs", "rhs"]).map_err(Error::from)?;
            let mut violations = 0usize;
            for &n in &cfg.oracle_grid {
                let law = conditional_sn_law(spec, n)?;
                let sd = law.unconditional.variance().sqrt();
                if sd.is_nan() || sd <= 0.0 {
                    return Err(Error::Precondition("degenerate sum: Var S_n = 0".into()).into());
                }
                let z = law.unconditional.scaled(1.0 / sd)?;
                for p in [1u32, 2] {
                    for r in verify_prop_quantile(&z, &half, p)? {
                        violations += r.violated as usize;
                        w.write_record([n.to_string(), format!("bound_p{p}"), fmt(r.u), fmt(r.lhs), fmt(r.rhs)])
                            .map_err(Error::from)?;
                    }
                }
                for (u, gap, bound) in quantile_gaps_from_law(&law, &cfg.quantile_levels)?.rows {
                    w.write_record([n.to_string(), "quantile_gap".into(), fmt(u), fmt(gap), fmt(bound)])
                        .map_err(Error::from)?;
                }
                for (u, gap) in superquantile_gaps_from_law(&law, &cfg.superquantile_levels)? {
                    w.write_record([n.to_string(), "superquantile_gap".into(), fmt(u), fmt(gap), String::new()])
                        .map_err(Error::from)?;
                }
            }
            w.flush()?;
            print_json(&serde_json::json!({ "violations": violations }))?;
            if violations > 0 {
                return Err(Failure::Check(format!("{violations} quantile-gap violations")));
            }
        }
        Command::Oracle { common, n } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let spec = lattice_spec(&cfg.model)?;
            let n = n.unwrap_or(*cfg.oracle_grid.last().unwrap());
            let law = conditional_sn_law(spec, n)?;
            std::fs::create_dir_all(&cfg.outputs)?;
            law.write_csv(std::fs::File::create(cfg.outputs.join("oracle_law.csv"))?)?;
            let w = cltlab::oracle::exact_w2_from_law(spec, &law, cltlab::oracle::Sigma2Choice::Exact)?;
            let be = cltlab::oracle::berry_esseen_from_law(&law)?;
            print_json(&serde_json::json!({
                "n": n,
                "sigma2": sigma2_exact(&cfg.model)?,
                "exact_w2": w,
                "berry_esseen": be,
                "mixture_discrepancy": law.mixture_discrepancy(),
            }))?;
        }
        Command::Report { common, check } => {
            setup_threads(&common)?;
            let cfg = load(&common)?;
            let summary = run_report(&cfg)?;
            for c in &summary.checks {
                println!(
                    "{}: {} (slope {}, window [{}, {}])",
                    c.name,
                    if c.passed { "pass" } else { "fail" },
                    c.value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
                    c.min,
                    c.max
                );
            }
            println!("report written to {}", cfg.outputs.display());
            if check && !summary.passed {
                return Err(Failure::Check("acceptance checks failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(4)
        }
    }
}
