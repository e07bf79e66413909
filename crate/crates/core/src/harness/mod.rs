//! Monte Carlo estimators, rate fits and the report battery.

mod config;
mod estimate;
mod rate;
mod report;

pub use config::{default_checks, Checks, CoefficientConfig, ConditionalConfig, ExperimentConfig, Sigma2Source, SlopeRange};
pub use estimate::{
    berry_esseen_from_sums, berry_esseen_mc, dkw_band, empirical_quantile, empirical_superquantile,
    estimate_conditional_w2, estimate_conditional_w2_grid, estimate_w2, estimate_w2_grid, ks_to_normal, sigma2_plugin,
    w2_of_sample, BerryEsseenMc, ConditionalW2Estimate, GaussianGrid, PooledOptions, Sigma2Plugin, W2Estimate,
    DEFAULT_BOOTSTRAP, MIN_POOLED,
};
pub use rate::{fit_rate, RateFit};
pub use report::{
    replicate_seed, resolve_sigma2, run_report, BeRow, CheckResult, CondRow, Fits, OracleRow, ReportSummary, Section,
    Sigma2Info, W2Row, SCHEMA_VERSION,
};
