//! Bayesian estimation of the two-parameter Ising model
//! `P(x) ∝ exp((beta/2) x'Ax + B sum_i x_i)` from a single observed
//! configuration, using the pseudo-likelihood.
//!
//! - [`coupling`]: random regular graphs, lattices, scaled adjacency matrices
//! - [`model`]: local fields, pseudo-likelihood and its derivatives
//! - [`exact`]: exhaustive enumeration of the true likelihood for small `n`
//! - [`sampler`]: Metropolis and exact samplers
//! - [`vb`]: priors, variational families and black-box variational inference
//! - [`pmle`]: the pseudo-maximum-likelihood baseline
//! - [`experiments`]: MSE benchmarks, contraction diagnostics, image reconstruction

pub mod coupling;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod pmle;
pub mod rng;
pub mod sampler;
pub mod vb;

pub use coupling::{CouplingMatrix, EdgeSet};
pub use error::{Error, Result};
pub use model::{ModelParams, SpinConfiguration};
