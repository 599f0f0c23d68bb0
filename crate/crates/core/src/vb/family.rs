//! Gaussian variational families over `z = (log beta, B)`.
//!
//! Both families are written through a lower-triangular Cholesky factor
//! `L = [[l11, 0], [l21, l22]]` of the covariance of `z`. The diagonal is
//! `softplus` of a free parameter, so every finite parameter vector maps to a
//! valid distribution. The mean-field family is the special case `l21 = 0`
//! with `sigma_k = l_kk`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::model::{ModelParams, Sym2};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `log(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// [`softplus`] floored at the smallest positive normal float, so scale
/// parameters stay strictly positive even where `e^x` underflows.
pub fn positive_softplus(x: f64) -> f64 {
    softplus(x).max(f64::MIN_POSITIVE)
}

/// Inverse of [`softplus`] for `y > 0`.
pub fn softplus_inv(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

/// Derivative of [`softplus`].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mf,
    Bn,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::Mf => 4,
            Family::Bn => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Mf => "mf",
            Family::Bn => "bn",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mf" => Ok(Family::Mf),
            "bn" => Ok(Family::Bn),
            other => Err(param_err(format!("unknown variational family `{other}`"))),
        }
    }
}

/// Mean-field: `log beta ~ N(mu1, sigma1^2)`, `B ~ N(mu2, sigma2^2)` independently,
/// with `sigma_k = softplus(eta_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalParamsMf {
    pub mu1: f64,
    pub mu2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl VariationalParamsMf {
    pub fn from_moments(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Self {
        Self {
            mu1,
            mu2,
            eta1: softplus_inv(sigma1),
            eta2: softplus_inv(sigma2),
        }
    }

    pub fn sigma1(&self) -> f64 {
        positive_softplus(self.eta1)
    }

    pub fn sigma2(&self) -> f64 {
        positive_softplus(self.eta2)
    }
}

/// Bivariate normal on `(log beta, B)` with covariance `L L'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalParamsBn {
    pub mu1: f64,
    pub mu2: f64,
    pub l11_eta: f64,
    pub l22_eta: f64,
    pub l21: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum VariationalParams {
    Mf(VariationalParamsMf),
    Bn(VariationalParamsBn),
}

/// Cholesky factor of the covariance of `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cholesky {
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl VariationalParams {
    /// Prior-matching start: zero means, unit standard deviations, no correlation.
    pub fn initial(family: Family) -> Self {
        let eta = softplus_inv(1.0);
        match family {
            Family::Mf => VariationalParams::Mf(VariationalParamsMf {
                mu1: 0.0,
                mu2: 0.0,
                eta1: eta,
                eta2: eta,
            }),
            Family::Bn => VariationalParams::Bn(VariationalParamsBn {
                mu1: 0.0,
                mu2: 0.0,
                l11_eta: eta,
                l22_eta: eta,
                l21: 0.0,
            }),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            VariationalParams::Mf(_) => Family::Mf,
            VariationalParams::Bn(_) => Family::Bn,
        }
    }

    /// Free parameters: MF `[mu1, mu2, eta1, eta2]`, BN `[mu1, mu2, l11_eta, l22_eta, l21]`.
    pub fn to_free(&self) -> Vec<f64> {
        match *self {
            VariationalParams::Mf(p) => vec![p.mu1, p.mu2, p.eta1, p.eta2],
            VariationalParams::Bn(p) => vec![p.mu1, p.mu2, p.l11_eta, p.l22_eta, p.l21],
        }
    }

    pub fn from_free(family: Family, v: &[f64]) -> Result<Self> {
        if v.len() != family.dim() {
            return Err(param_err(format!(
                "{} family has {} free parameters, got {}",
                family.name(),
                family.dim(),
                v.len()
            )));
        }
        let nu = match family {
            Family::Mf => VariationalParams::Mf(VariationalParamsMf {
                mu1: v[0],
                mu2: v[1],
                eta1: v[2],
                eta2: v[3],
            }),
            Family::Bn => VariationalParams::Bn(VariationalParamsBn {
                mu1: v[0],
                mu2: v[1],
                l11_eta: v[2],
                l22_eta: v[3],
                l21: v[4],
            }),
        };
        nu.validate()?;
        Ok(nu)
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_free().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(param_err(format!("non-finite variational parameters {self:?}")))
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        match *self {
            VariationalParams::Mf(p) => [p.mu1, p.mu2],
            VariationalParams::Bn(p) => [p.mu1, p.mu2],
        }
    }

    pub fn cholesky(&self) -> Cholesky {
        match *self {
            VariationalParams::Mf(p) => Cholesky {
                l11: positive_softplus(p.eta1),
                l21: 0.0,
                l22: positive_softplus(p.eta2),
            },
            VariationalParams::Bn(p) => Cholesky {
                l11: positive_softplus(p.l11_eta),
                l21: p.l21,
                l22: positive_softplus(p.l22_eta),
            },
        }
    }

    /// Covariance of `z = (log beta, B)`.
    pub fn covariance(&self) -> Sym2 {
        let l = self.cholesky();
        Sym2 {
            a: l.l11 * l.l11,
            b: l.l11 * l.l21,
            c: l.l21 * l.l21 + l.l22 * l.l22,
        }
    }

    /// `(E beta, E B) = (exp(mu1 + sigma11/2), mu2)`.
    pub fn analytic_mean(&self) -> ModelParams {
        let [mu1, mu2] = self.mean();
        ModelParams {
            beta: (mu1 + 0.5 * self.covariance().a).exp(),
            b_field: mu2,
        }
    }

    /// Draws `z = mu + L eps` with standard normal `eps`.
    pub fn sample_z<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let [mu1, mu2] = self.mean();
        let l = self.cholesky();
        [mu1 + l.l11 * e1, mu2 + l.l21 * e1 + l.l22 * e2]
    }

    fn whiten(&self, z: [f64; 2]) -> ([f64; 2], Cholesky) {
        let [mu1, mu2] = self.mean();
        let l = self.cholesky();
        let u1 = (z[0] - mu1) / l.l11;
        let u2 = (z[1] - mu2 - l.l21 * u1) / l.l22;
        ([u1, u2], l)
    }

    /// Log density of `z` under the Gaussian.
    pub fn log_density_z(&self, z: [f64; 2]) -> f64 {
        let ([u1, u2], l) = self.whiten(z);
        -LN_2PI - l.l11.ln() - l.l22.ln() - 0.5 * (u1 * u1 + u2 * u2)
    }

    /// Gradient of [`log_density_z`](Self::log_density_z) with respect to
    /// the free parameters, in the order of [`to_free`](Self::to_free).
    ///
    /// Only the first [`Family::dim`] entries are meaningful.
    pub fn grad_log_density_z(&self, z: [f64; 2]) -> [f64; 5] {
        let ([u1, u2], l) = self.whiten(z);
        let d_mu1 = u1 / l.l11 - u2 * l.l21 / (l.l11 * l.l22);
        let d_mu2 = u2 / l.l22;
        let d_l11 = (u1 * u1 - 1.0) / l.l11 - u2 * l.l21 * u1 / (l.l11 * l.l22);
        let d_l22 = (u2 * u2 - 1.0) / l.l22;
        match *self {
            VariationalParams::Mf(p) => [
                d_mu1,
                d_mu2,
                d_l11 * sigmoid(p.eta1),
                d_l22 * sigmoid(p.eta2),
                0.0,
            ],
            VariationalParams::Bn(p) => [
                d_mu1,
                d_mu2,
                d_l11 * sigmoid(p.l11_eta),
                d_l22 * sigmoid(p.l22_eta),
                u1 * u2 / l.l22,
            ],
        }
    }
}

pub(crate) fn z_of(theta: &ModelParams) -> Result<[f64; 2]> {
    if !(theta.beta > 0.0 && theta.beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be > 0, got {}", theta.beta)));
    }
    Ok([theta.beta.ln(), theta.b_field])
}

pub(crate) fn theta_of(z: [f64; 2]) -> ModelParams {
    ModelParams {
        beta: z[0].exp().max(f64::MIN_POSITIVE),
        b_field: z[1],
    }
}

/// `log q(theta; nu)` for `theta = (beta, B)`, including the `-log beta`
/// Jacobian of the log transform.
pub fn log_q(nu: &VariationalParams, theta: &ModelParams) -> Result<f64> {
    let z = z_of(theta)?;
    Ok(nu.log_density_z(z) - z[0])
}

/// `grad_nu log q(theta; nu)` over the free parameters.
pub fn grad_log_q(nu: &VariationalParams, theta: &ModelParams) -> Result<Vec<f64>> {
    let z = z_of(theta)?;
    let g = nu.grad_log_density_z(z);
    Ok(g[..nu.family().dim()].to_vec())
}

/// `s` draws of `theta = (exp(z1), z2)` from `q(.; nu)`.
pub fn sample_q(nu: &VariationalParams, s: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = crate::rng::stream_rng(seed, 0);
    (0..s).map(|_| theta_of(nu.sample_z(&mut rng))).collect()
}
