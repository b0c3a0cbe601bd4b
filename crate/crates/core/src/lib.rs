//! Bayesian inference toolkit for common psychology-experiment data types.
//!
//! The crate bundles everything needed to go from raw observations to
//! posterior comparisons without an external probabilistic-programming
//! runtime: distribution kernels with parameter gradients, a No-U-Turn
//! sampler with step-size and mass-matrix adaptation, five ready-made data
//! models (t-test, reaction times, success rates, linear trends, colors),
//! convergence diagnostics, ROPE/HDI comparison machinery, a Bayesian
//! bootstrap, and SVG plot emission.

pub mod bootstrap;
pub mod compare;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod models;
pub mod plots;
pub mod prior;
pub mod sampler;

pub use error::{Error, Result};
pub use sampler::{nuts_sample, Constraint, Draws, SamplerConfig, Target};
