//! # cltlab
//!
//! Numerical laboratory for the quadratic transport cost in the central limit
//! theorem for bounded stationary sequences, conditional on the past.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`gaussian`] | `Φ`, `Φ^{-1}`, superquantile, Mills ratio |
//! | [`transport`] | exact 1-D `W_p`, `K_p`, quantile-gap bound, conditional dominance |
//! | [`processes`] | generators: iid, finite Markov, circle walk, LSV map, martingale differences, moment-matched |
//! | [`coefficients`] | `θ_{X,p,q}`, α-dependence, restricted τ, `σ²`, `Var S_n`, `β₃` |
//! | [`oracle`] | exact conditional laws of `S_n` for lattice Markov chains |
//! | [`harness`] | Monte Carlo estimators, rate fits, reports |

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod coefficients;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod numeric;
pub mod oracle;
pub mod processes;
pub mod transport;

pub use error::{Error, Result};
