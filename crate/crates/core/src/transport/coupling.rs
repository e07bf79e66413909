//! Conditional versus unconditional quadratic cost.
//!
//! Given a finite joint law of `(label, value)` and a target law `P_Y` with `Y`
//! independent of the label, couple `X* = F_{X|label}^{-1}(U)` with
//! `Y* = F_Y^{-1}(U)` through one uniform `U` independent of the label. `X*`
//! has the value marginal, so `W₂²(P_X, P_Y) ≤ E[W₂²(P_{X|label}, P_Y)]`.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaussian::GaussianLaw;

use super::cost::{gaussian_cost, w2_sq_discrete};
use super::dist::{Atoms, LatticeDist};

/// Finite joint law of `(label, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJoint {
    cells: Vec<(usize, f64, f64)>,
}

impl FiniteJoint {
    /// Cells are `(label, value, probability)`; duplicates are merged.
    pub fn new(cells: Vec<(usize, f64, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidDistribution("empty joint law".into()));
        }
        if cells.iter().any(|c| !(c.2 >= 0.0) || !c.1.is_finite()) {
            return Err(Error::InvalidDistribution("joint cells need finite values and nonnegative mass".into()));
        }
        let total = crate::numeric::sum(&cells.iter().map(|c| c.2).collect::<Vec<_>>());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("joint masses sum to {total}")));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[(usize, f64, f64)] {
        &self.cells
    }

    /// Value marginal as sorted atoms.
    pub fn marginal(&self) -> Vec<(f64, f64)> {
        merge_atoms(self.cells.iter().map(|c| (c.1, c.2)))
    }

    /// `(P(label), law of value | label)` per label with positive mass.
    pub fn conditionals(&self) -> Vec<(usize, f64, Vec<(f64, f64)>)> {
        let mut by_label: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
        for &(l, x, w) in &self.cells {
            by_label.entry(l).or_default().push((x, w));
        }
        by_label
            .into_iter()
            .filter_map(|(l, cells)| {
                let mass: f64 = crate::numeric::sum(&cells.iter().map(|c| c.1).collect::<Vec<_>>());
                if mass <= 0.0 {
                    return None;
                }
                let cond = merge_atoms(cells.into_iter().map(|(x, w)| (x, w / mass)));
                Some((l, mass, cond))
            })
            .collect()
    }
}

fn merge_atoms(it: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = it.filter(|a| a.1 > 0.0).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (x, w) in v {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Target law of the comparison variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Lattice(LatticeDist),
    Gaussian(GaussianLaw),
}

impl Target {
    fn w2_sq(&self, atoms: &[(f64, f64)]) -> Result<f64> {
        match self {
            Target::Lattice(d) => w2_sq_discrete(atoms, &d.atoms()),
            Target::Gaussian(g) => gaussian_cost(atoms, g.sd(), 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    /// `W₂²(P_X, P_Y)`
    pub unconditional: f64,
    /// `Σ_l P(l) W₂²(P_{X|l}, P_Y)`
    pub conditional_mean: f64,
}

impl Dominance {
    pub fn holds(&self, slack: f64) -> bool {
        self.unconditional <= self.conditional_mean + slack
    }
}

pub fn conditional_w2_dominates(joint: &FiniteJoint, target: &Target) -> Result<Dominance> {
    let unconditional = target.w2_sq(&joint.marginal())?;
    let mut acc = crate::numeric::NeumaierSum::default();
    for (_, mass, cond) in joint.conditionals() {
        acc.add(mass * target.w2_sq(&cond)?);
    }
    Ok(Dominance { unconditional, conditional_mean: acc.value() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_label_gives_equality() {
        let cells = vec![(0, -1.0, 0.15), (0, 2.0, 0.15), (1, -1.0, 0.35), (1, 2.0, 0.35)];
        let j = FiniteJoint::new(cells).unwrap();
        let d = conditional_w2_dominates(&j, &Target::Gaussian(GaussianLaw::standard())).unwrap();
        assert!((d.unconditional - d.conditional_mean).abs() < 1e-13);
    }

    #[test]
    fn sign_label_against_point_mass() {
        let j = FiniteJoint::new(vec![(0, -1.5, 0.5), (1, 1.5, 0.5)]).unwrap();
        let d = conditional_w2_dominates(&j, &Target::Lattice(LatticeDist::dirac(0.0))).unwrap();
        assert!((d.unconditional - 2.25).abs() < 1e-15);
        assert!((d.conditional_mean - 2.25).abs() < 1e-15);
    }

    #[test]
    fn empty_joint_rejected() {
        assert!(FiniteJoint::new(vec![]).is_err());
    }
}
