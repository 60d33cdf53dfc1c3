//! Distributed stochastic compositional optimization over directed networks.
//!
//! Every agent `i` of a network owns a two-level objective `f_i(g_i(x))` whose
//! inner map `g_i` and outer function `f_i` are only reachable through noisy
//! samples. The agents cooperate to minimize `h(x) = (1/n) Σ_i f_i(g_i(x))`
//! while exchanging information over directed links.
//!
//! The crate is organised as:
//!
//! - [`topology`]: directed communication graphs, the row-stochastic /
//!   column-stochastic weight pair, Perron vectors and contraction factors.
//! - [`problems`]: the sampling-oracle contract and concrete problem families.
//! - [`algorithms`]: the push-pull method with stochastically corrected inner
//!   tracking (`ab-dscsc`), the single-agent baselines `scgd`/`scsc`, and the
//!   undirected baselines `gp-dscgd`/`gt-dscgd`, plus the run driver.
//! - [`metrics`]: per-iteration diagnostics and rate/bound checks.
//! - [`normality`]: replicated runs and covariance comparison for the
//!   Polyak-Ruppert averaged statistic.
//! - [`expcli`]: configuration files, CSV artifacts and the command line.

pub mod algorithms;
pub mod error;
pub mod expcli;
pub mod linalg;
pub mod metrics;
pub mod normality;
pub mod problems;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
