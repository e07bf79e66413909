//! Exact one-dimensional transport costs.

mod cost;
mod coupling;
mod dist;
mod quantile_gap;

pub use cost::{
    gaussian_cost, w2_empirical_gaussian, w2_lattice_gaussian, w2_sq_discrete, w2_sq_gaussian, wp_empirical,
    wp_pow_discrete,
};
pub use coupling::{conditional_w2_dominates, Dominance, FiniteJoint, Target};
pub use dist::{Atoms, EmpiricalDist, LatticeDist, MASS_TOL};
pub use quantile_gap::{kp_integral, quantile_gap_bound, verify_prop_quantile, QuantileGapReport, MOMENT_TOL};
