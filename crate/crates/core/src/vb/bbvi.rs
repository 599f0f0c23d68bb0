use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::family::{sample_q, Family, VariationalParams};
use super::PseudoPosterior;
use crate::coupling::CouplingMatrix;
use crate::error::{param_err, Error, Result};
use crate::model::{ModelParams, SpinConfiguration};
use crate::rng::{stream_rng, IsingRng};

/// Settings of the stochastic-gradient ELBO maximisation.
///
/// The step size is `rho_t = rho0 / (1 + t / tau)`, which satisfies
/// `sum rho_t = inf` and `sum rho_t^2 < inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BbviConfig {
    pub family: Family,
    /// Monte Carlo draws per gradient estimate.
    pub mc_samples: usize,
    pub max_iters: usize,
    pub rho0: f64,
    pub tau: f64,
    /// Stop after this many checkpoints without improvement of the smoothed ELBO.
    pub patience: usize,
    /// Draws per checkpoint ELBO estimate.
    pub elbo_eval_samples: usize,
    /// Iterations between ELBO checkpoints.
    pub eval_every: usize,
    /// Width of the moving average over checkpoints.
    pub smoothing_window: usize,
    /// Rescale gradient estimates whose L2 norm exceeds this.
    pub clip_norm: Option<f64>,
    pub baseline: Baseline,
    pub seed: u64,
}

impl Default for BbviConfig {
    fn default() -> Self {
        Self {
            family: Family::Mf,
            mc_samples: 200,
            max_iters: 3000,
            rho0: 0.05,
            tau: 100.0,
            patience: 5,
            elbo_eval_samples: 200,
            eval_every: 10,
            smoothing_window: 5,
            clip_norm: Some(10.0),
            baseline: Baseline::LeaveOneOut,
            seed: 0,
        }
    }
}

impl BbviConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < 2 {
            return Err(param_err("mc_samples must be at least 2"));
        }
        if self.elbo_eval_samples < 2 {
            return Err(param_err("elbo_eval_samples must be at least 2"));
        }
        if !(self.rho0 > 0.0 && self.tau > 0.0) {
            return Err(param_err("rho0 and tau must be positive"));
        }
        if self.max_iters == 0 || self.eval_every == 0 || self.smoothing_window == 0 {
            return Err(param_err("max_iters, eval_every and smoothing_window must be positive"));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(param_err("clip_norm must be positive"));
            }
        }
        Ok(())
    }

    pub fn learning_rate(&self, t: usize) -> f64 {
        self.rho0 / (1.0 + t as f64 / self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElboEstimate {
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElboPoint {
    pub iter: usize,
    pub elbo: f64,
    pub elbo_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Plateau,
    MaxIters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    /// Sample mean of draws from `q`.
    pub mc: ModelParams,
    /// `(exp(mu1 + sigma11 / 2), mu2)`.
    pub analytic: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub nu_star: VariationalParams,
    /// ELBO estimate at the start of each iteration, from that iteration's draws.
    pub elbo_trace: Vec<ElboPoint>,
    pub theta_hat: PointEstimate,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    pub wall_time: f64,
}

const POINT_ESTIMATE_STREAM: u64 = u64::MAX;

fn iteration_stream(t: usize) -> u64 {
    2 * t as u64
}

fn checkpoint_stream(t: usize) -> u64 {
    2 * t as u64 + 1
}

/// Constant subtracted from `log pi - log q` inside the gradient estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// The plain estimator, no baseline.
    None,
    /// Each draw uses the mean of the other `s - 1` draws, which keeps the
    /// estimator unbiased. Removes the large common offset of
    /// `log pi - log q`, which otherwise dominates the variance.
    #[default]
    LeaveOneOut,
}

struct Batch {
    grad: [f64; 5],
    elbo: ElboEstimate,
}

/// Draws `s` samples and forms the score-function gradient
/// `(1/s) sum grad log q(z_s) (log pi(z_s) - log q(z_s) - b_s)` together with
/// the ELBO estimate from the same draws.
fn score_batch(
    nu: &VariationalParams,
    s: usize,
    rng: &mut IsingRng,
    log_joint_z: &impl Fn([f64; 2]) -> f64,
    baseline: Option<Baseline>,
) -> Batch {
    let mut fs = Vec::with_capacity(s);
    let mut gs = Vec::with_capacity(if baseline.is_some() { s } else { 0 });
    for _ in 0..s {
        let z = nu.sample_z(rng);
        fs.push(log_joint_z(z) - nu.log_density_z(z));
        if baseline.is_some() {
            gs.push(nu.grad_log_density_z(z));
        }
    }
    let sf = s as f64;
    let sum: f64 = fs.iter().sum();
    let mean = sum / sf;
    let var = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (sf - 1.0);

    let mut grad = [0.0; 5];
    if let Some(baseline) = baseline {
        for (g, &f) in gs.iter().zip(&fs) {
            let b = match baseline {
                Baseline::None => 0.0,
                Baseline::LeaveOneOut => (sum - f) / (sf - 1.0),
            };
            for k in 0..5 {
                grad[k] += g[k] * (f - b);
            }
        }
        grad.iter_mut().for_each(|g| *g /= sf);
    }
    Batch {
        grad,
        elbo: ElboEstimate {
            value: mean,
            se: (var / sf).sqrt(),
        },
    }
}

/// Monte Carlo ELBO gradient for an arbitrary log joint density of
/// `z = (log beta, B)` (that is, `log pi(theta) + log beta`).
pub fn bbvi_gradient_with(
    nu: &VariationalParams,
    s: usize,
    seed: u64,
    log_joint_z: impl Fn([f64; 2]) -> f64,
) -> Result<Vec<f64>> {
    if s < 2 {
        return Err(param_err("need at least 2 Monte Carlo samples"));
    }
    nu.validate()?;
    let mut rng = stream_rng(seed, 0);
    let batch = score_batch(nu, s, &mut rng, &log_joint_z, Some(Baseline::None));
    Ok(batch.grad[..nu.family().dim()].to_vec())
}

/// Monte Carlo ELBO gradient for the pseudo-posterior of `(A, x)`.
pub fn bbvi_gradient(
    nu: &VariationalParams,
    a: &CouplingMatrix,
    x: &SpinConfiguration,
    s: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let post = PseudoPosterior::new(a, x)?;
    bbvi_gradient_with(nu, s, seed, |z| post.log_joint_z(z))
}

/// Monte Carlo estimate of `E_q[log pi(theta, x) - log q(theta)]` with its standard error.
pub fn elbo_estimate(
    nu: &VariationalParams,
    a: &CouplingMatrix,
    x: &SpinConfiguration,
    s: usize,
    seed: u64,
) -> Result<ElboEstimate> {
    if s < 2 {
        return Err(param_err("need at least 2 Monte Carlo samples"));
    }
    nu.validate()?;
    let post = PseudoPosterior::new(a, x)?;
    let mut rng = stream_rng(seed, 0);
    Ok(score_batch(nu, s, &mut rng, &|z| post.log_joint_z(z), None).elbo)
}

/// Sample mean of `s` draws from `q`, alongside the closed-form mean.
pub fn point_estimate(nu: &VariationalParams, s: usize, seed: u64) -> Result<PointEstimate> {
    if s == 0 {
        return Err(param_err("need at least one draw for a point estimate"));
    }
    nu.validate()?;
    let draws = sample_q(nu, s, seed);
    let sf = s as f64;
    let mc = ModelParams {
        beta: draws.iter().map(|t| t.beta).sum::<f64>() / sf,
        b_field: draws.iter().map(|t| t.b_field).sum::<f64>() / sf,
    };
    Ok(PointEstimate {
        mc,
        analytic: nu.analytic_mean(),
    })
}

/// KL divergence from a mean-field `q` to the prior, in closed form.
///
/// Both factors are univariate normals on `(log beta, B)` compared with
/// `N(0, 1)`: `KL = sum_k (sigma_k^2 + mu_k^2 - 1 - log sigma_k^2) / 2`.
pub fn kl_q_prior_analytic(nu: &VariationalParams) -> Result<f64> {
    let VariationalParams::Mf(p) = nu else {
        return Err(param_err("closed-form prior KL is only defined for the mean-field family"));
    };
    let term = |mu: f64, sigma: f64| {
        let s2 = sigma * sigma;
        0.5 * (s2 + mu * mu - 1.0 - s2.ln())
    };
    Ok(term(p.mu1, p.sigma1()) + term(p.mu2, p.sigma2()))
}

/// Fits `q` by stochastic gradient ascent on the ELBO.
///
/// Every iteration draws `mc_samples` points from its own sub-stream of
/// `cfg.seed`, forms the score-function gradient, clips it, and takes a step
/// of size `rho_t`. Every `eval_every` iterations an independent ELBO
/// estimate is recorded; the fit stops once the moving average of the last
/// `smoothing_window` such estimates has failed to improve `patience` times
/// in a row, or after `max_iters` iterations.
pub fn bbvi_fit(a: &CouplingMatrix, x: &SpinConfiguration, cfg: &BbviConfig) -> Result<FitResult> {
    cfg.validate()?;
    let start = Instant::now();
    let post = PseudoPosterior::new(a, x)?;
    let log_joint_z = |z: [f64; 2]| post.log_joint_z(z);
    let family = cfg.family;
    let dim = family.dim();

    let mut nu = VariationalParams::initial(family);
    let mut free = nu.to_free();
    let mut trace = Vec::new();
    let mut checkpoints: Vec<f64> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut stale = 0;
    let mut stop_reason = StopReason::MaxIters;

    for t in 0..cfg.max_iters {
        let mut rng = stream_rng(cfg.seed, iteration_stream(t));
        let batch = score_batch(&nu, cfg.mc_samples, &mut rng, &log_joint_z, Some(cfg.baseline));
        let grad = &batch.grad[..dim];
        if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                iteration: t,
                detail: format!("component {k} is {} at nu = {nu:?}", grad[k]),
            });
        }
        trace.push(ElboPoint {
            iter: t,
            elbo: batch.elbo.value,
            elbo_se: batch.elbo.se,
        });

        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let scale = match cfg.clip_norm {
            Some(c) if norm > c => c / norm,
            _ => 1.0,
        };
        let rho = cfg.learning_rate(t);
        for (v, g) in free.iter_mut().zip(grad) {
            *v += rho * scale * g;
        }
        nu = VariationalParams::from_free(family, &free)?;

        if (t + 1) % cfg.eval_every == 0 {
            let mut rng = stream_rng(cfg.seed, checkpoint_stream(t));
            let e = score_batch(&nu, cfg.elbo_eval_samples, &mut rng, &log_joint_z, None).elbo;
            checkpoints.push(e.value);
            let window = &checkpoints[checkpoints.len().saturating_sub(cfg.smoothing_window)..];
            let smoothed = window.iter().sum::<f64>() / window.len() as f64;
            if smoothed > best {
                best = smoothed;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    stop_reason = StopReason::Plateau;
                    break;
                }
            }
        }
    }

    let theta_hat = point_estimate(&nu, cfg.mc_samples, stream_seed(cfg.seed))?;
    Ok(FitResult {
        nu_star: nu,
        iterations_run: trace.len(),
        elbo_trace: trace,
        theta_hat,
        stop_reason,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Seed for the final point-estimate draws, distinct from every iteration stream.
fn stream_seed(seed: u64) -> u64 {
    use rand::Rng;
    stream_rng(seed, POINT_ESTIMATE_STREAM).random()
}
