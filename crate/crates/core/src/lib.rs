//! Bayesian quantile-matching estimation.
//!
//! Given `M` empirical quantiles `x` at levels `q`, computed from `N` hidden
//! samples, `qmatch` infers a parametric distribution through the joint
//! likelihood of the corresponding order statistics. A Gaussian-noise CDF
//! regression is provided as a baseline, along with posterior-predictive
//! queries and model comparison across families.
//!
//! Modules:
//! - [`distributions`]: parametric families and the [`special`] functions
//!   behind them.
//! - [`orderstats`]: order-statistic likelihood kernels (log domain).
//! - [`inference`]: priors, reparameterization, MCMC, MAP and MSE fits,
//!   convergence diagnostics.
//! - [`predictive`]: posterior-predictive curves, quantiles, scores and
//!   model comparison.
//! - [`simulation`]: sample-and-sort generators and Monte-Carlo oracles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod inference;
pub mod orderstats;
pub mod predictive;
pub mod simulation;
pub mod special;

pub use distributions::{Constraint, Dist, Family};
pub use error::{Error, Result};
