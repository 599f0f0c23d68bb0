//! Drawing spin configurations from the Ising model.
//!
//! [`mh_sample`] runs one single-spin-flip Metropolis chain and returns its
//! last state. [`exact_sample`] draws i.i.d. configurations by inverse CDF
//! over the enumerated state space and serves as the reference for small `n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::error::{param_err, Result};
use crate::exact::state_probabilities;
use crate::model::{check_dims, local_fields, ModelParams, SpinConfiguration};
use crate::rng::{stream_rng, IsingRng};

/// Largest `n` accepted by [`exact_sample`].
pub const MAX_EXACT_SAMPLE_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub iterations: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<i8>>,
}

impl MhConfig {
    pub const FULL_ITERATIONS: u64 = 1_000_000;

    pub fn new(iterations: u64, seed: u64) -> Self {
        Self {
            iterations,
            seed,
            initial: None,
        }
    }
}

/// `H(x) = (beta/2) x'Ax + B sum_i x_i`, the log of the unnormalised likelihood.
pub fn energy(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<f64> {
    check_dims(a, x)?;
    let quad: f64 = a
        .upper_entries()
        .map(|(i, j, w)| w * x.get(i) * x.get(j))
        .sum();
    Ok(theta.beta * quad + theta.b_field * x.magnetization() as f64)
}

/// Change in `H` when spin `i` (currently `x_i`, with local field `m_i`) flips.
#[inline]
pub fn flip_delta(theta: &ModelParams, x_i: f64, m_i: f64) -> f64 {
    -2.0 * x_i * (theta.beta * m_i + theta.b_field)
}

/// Metropolis acceptance probability `min(1, exp(dH))`.
#[inline]
pub fn acceptance_probability(delta_h: f64) -> f64 {
    if delta_h > 0.0 {
        1.0
    } else {
        delta_h.exp()
    }
}

fn random_spins(n: usize, rng: &mut IsingRng) -> SpinConfiguration {
    SpinConfiguration::new((0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
        .expect("valid spins")
}

/// Runs `cfg.iterations` single-spin Metropolis updates and returns the last
/// state.
///
/// Each step picks a site uniformly at random and proposes to flip it. Local
/// fields are maintained incrementally, so a step costs `O(degree)`.
pub fn mh_sample(theta: &ModelParams, a: &CouplingMatrix, cfg: &MhConfig) -> Result<SpinConfiguration> {
    if cfg.iterations == 0 {
        return Err(param_err("MH chain needs at least one iteration"));
    }
    let n = a.n();
    if n == 0 {
        return Err(param_err("empty coupling matrix"));
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let mut x = match &cfg.initial {
        Some(init) => SpinConfiguration::new(init.clone())?,
        None => random_spins(n, &mut rng),
    };
    let mut fields = local_fields(a, &x)?;
    for _ in 0..cfg.iterations {
        let i = rng.random_range(0..n);
        let xi = x.get(i);
        let dh = flip_delta(theta, xi, fields[i]);
        let accept = dh > 0.0 || rng.random::<f64>() < dh.exp();
        if accept {
            x.flip(i);
            for &(j, w) in a.row(i) {
                fields[j] -= 2.0 * w * xi;
            }
        }
    }
    Ok(x)
}

/// `n_draws` i.i.d. configurations from the exact likelihood.
pub fn exact_sample(
    theta: &ModelParams,
    a: &CouplingMatrix,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<SpinConfiguration>> {
    let probs = state_probabilities(theta, a, MAX_EXACT_SAMPLE_N)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = stream_rng(seed, 0);
    let last = cdf.len() - 1;
    Ok((0..n_draws)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            SpinConfiguration::from_bits(a.n(), idx as u64)
        })
        .collect())
}
