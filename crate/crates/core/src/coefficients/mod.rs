//! Dependence coefficients and limit constants.

mod limits;
mod theta;

pub use limits::{
    beta3, beta3_mc, circle_sigma2, covariances, limit_constants, markov_sigma2, second_eigen_modulus, sigma2_exact,
    var_sn, var_sn_mc, Beta3, LimitConstants,
};
pub use theta::{
    alpha_dep, exponent_tuples, tau_restricted, theta_circle_first, theta_exact, theta_mc, ThetaMc, ThetaValue,
    TupleMode, DEFAULT_WINDOW,
};

use serde::Serialize;
use std::io::Write;

use crate::error::Result;
use crate::processes::FiniteMarkovSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoefficientKind {
    Theta { p: usize, q: usize },
    AlphaDep { l: usize },
    TauRestricted { eta: f64, l: usize },
}

impl CoefficientKind {
    fn label(&self) -> String {
        match self {
            CoefficientKind::Theta { .. } => "theta".into(),
            CoefficientKind::AlphaDep { .. } => "alpha_dep".into(),
            CoefficientKind::TauRestricted { eta, .. } => format!("tau_restricted(eta={eta})"),
        }
    }

    fn pq(&self) -> (usize, Option<usize>) {
        match *self {
            CoefficientKind::Theta { p, q } => (p, Some(q)),
            CoefficientKind::AlphaDep { l } | CoefficientKind::TauRestricted { l, .. } => (l, None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Estimator {
    /// Exact per tuple, supremum over a finite window.
    Exact,
    MonteCarlo { replicates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub k: usize,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub kind: CoefficientKind,
    pub estimator: Estimator,
    pub window: usize,
    pub rows: Vec<CoefficientRow>,
}

impl CoefficientTable {
    /// Exact windowed `θ_{X,p,q}(k)` over `lags`.
    pub fn theta_exact(
        spec: &FiniteMarkovSpec,
        lags: &[usize],
        p: usize,
        q: usize,
        window: usize,
        mode: TupleMode,
    ) -> Result<Self> {
        let rows = lags
            .iter()
            .map(|&k| Ok(CoefficientRow { k, value: theta_exact(spec, k, p, q, window, mode)?.value, stderr: None }))
            .collect::<Result<_>>()?;
        Ok(Self { kind: CoefficientKind::Theta { p, q }, estimator: Estimator::Exact, window, rows })
    }

    pub fn alpha_dep(spec: &FiniteMarkovSpec, lags: &[usize], l: usize, window: usize) -> Result<Self> {
        let rows = lags
            .iter()
            .map(|&k| Ok(CoefficientRow { k, value: alpha_dep(spec, k, l, window)?, stderr: None }))
            .collect::<Result<_>>()?;
        Ok(Self { kind: CoefficientKind::AlphaDep { l }, estimator: Estimator::Exact, window, rows })
    }

    pub fn tau_restricted(spec: &FiniteMarkovSpec, lags: &[usize], eta: f64, l: usize, window: usize) -> Result<Self> {
        let rows = lags
            .iter()
            .map(|&k| Ok(CoefficientRow { k, value: tau_restricted(spec, k, eta, l, window)?, stderr: None }))
            .collect::<Result<_>>()?;
        Ok(Self { kind: CoefficientKind::TauRestricted { eta, l }, estimator: Estimator::Exact, window, rows })
    }

    /// CSV rows `kind,p,q,k,value,estimator,window,stderr`.
    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        if header {
            wr.write_record(["kind", "p", "q", "k", "value", "estimator", "window", "stderr"])?;
        }
        let (p, q) = self.kind.pq();
        let estimator = match self.estimator {
            Estimator::Exact => "exact".to_string(),
            Estimator::MonteCarlo { replicates } => format!("monte_carlo(lower_bound,R={replicates})"),
        };
        for r in &self.rows {
            wr.write_record([
                self.kind.label(),
                p.to_string(),
                q.map(|q| q.to_string()).unwrap_or_default(),
                r.k.to_string(),
                format!("{:.16e}", r.value),
                estimator.clone(),
                self.window.to_string(),
                r.stderr.map(|s| format!("{s:.16e}")).unwrap_or_default(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}
