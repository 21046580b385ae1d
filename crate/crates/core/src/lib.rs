//! Randomly connected stochastic neuronal networks with distance-dependent
//! connectivity and transmission delays.
//!
//! The crate covers four layers that share one set of conventions (time grid,
//! delay rounding, seeding):
//!
//! - [`disorder`]: sampling of frozen environments (positions, Bernoulli
//!   edges, delays) and the exact Laplace transform of the averaged delay
//!   kernel.
//! - [`netsim`]: Euler–Maruyama simulation of the finite network and of the
//!   mean-field comparison processes driven by the same Brownian increments.
//! - [`meanfield`]: the Gaussian moment reduction of the firing-rate mean-field
//!   equation and a same-noise Picard particle solver for the McKean–Vlasov
//!   equation.
//! - [`dispersion`]: the characteristic equation of the stationary state,
//!   Hopf curve tracing and regime classification.
//!
//! [`harness`] builds the quenched/annealed convergence and pairwise
//! independence experiments on top of them, and [`cli`] exposes everything
//! through the `delaynet` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod disorder;
pub mod dispersion;
pub mod error;
pub mod harness;
pub mod history;
pub mod meanfield;
pub mod model;
pub mod netsim;
pub mod oscillation;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
