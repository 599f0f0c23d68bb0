//! Variational Bayes for `(beta, B)` under the pseudo-likelihood.
//!
//! Prior: `log beta ~ N(0, 1)` and `B ~ N(0, 1)`, independent. The
//! unnormalised posterior `pi(theta, x) = L(theta) p(theta)` is approximated
//! by a Gaussian on `(log beta, B)` fitted with black-box variational
//! inference (score-function gradients of the ELBO and a Robbins-Monro step
//! size).

mod bbvi;
mod family;

pub use bbvi::{
    bbvi_fit, bbvi_gradient, bbvi_gradient_with, elbo_estimate, kl_q_prior_analytic,
    point_estimate, Baseline, BbviConfig, ElboEstimate, ElboPoint, FitResult, PointEstimate, StopReason,
};
pub use family::{
    grad_log_q, log_q, positive_softplus, sample_q, sigmoid, softplus, softplus_inv, Cholesky,
    Family, VariationalParams, VariationalParamsBn, VariationalParamsMf,
};

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::model::{pseudo_log_lik, ModelParams, PseudoLikelihood, SpinConfiguration};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-normal prior on `beta` times standard normal prior on `B`.
pub fn log_prior(theta: &ModelParams) -> Result<f64> {
    if !(theta.beta > 0.0) {
        return Err(Error::Domain(format!("beta must be > 0, got {}", theta.beta)));
    }
    let lb = theta.beta.ln();
    Ok(-lb - 2.0 * HALF_LN_2PI - 0.5 * lb * lb - 0.5 * theta.b_field * theta.b_field)
}

/// `log L(theta) + log p(theta)`.
pub fn log_joint(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<f64> {
    let prior = log_prior(theta)?;
    Ok(pseudo_log_lik(theta, a, x)? + prior)
}

/// The unnormalised pseudo-posterior, evaluated in `z = (log beta, B)`.
#[derive(Debug, Clone)]
pub struct PseudoPosterior {
    lik: PseudoLikelihood,
}

impl PseudoPosterior {
    pub fn new(a: &CouplingMatrix, x: &SpinConfiguration) -> Result<Self> {
        Ok(Self {
            lik: PseudoLikelihood::new(a, x)?,
        })
    }

    pub fn likelihood(&self) -> &PseudoLikelihood {
        &self.lik
    }

    /// Log joint density of `z`: `log pi(theta, x) + log beta`.
    ///
    /// The `log beta` Jacobian cancels the `1/beta` of the log-normal prior,
    /// which keeps the expression finite for any real `z`.
    pub fn log_joint_z(&self, z: [f64; 2]) -> f64 {
        let beta = z[0].exp();
        self.lik.log_lik(beta, z[1]) - 2.0 * HALF_LN_2PI - 0.5 * (z[0] * z[0] + z[1] * z[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{random_regular_edges, scaled_adjacency};

    #[test]
    fn prior_values() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = log_prior(&ModelParams { beta: 1.0, b_field: 0.0 }).unwrap();
        assert!((v + two_pi.ln()).abs() < 1e-14);
        let v = log_prior(&ModelParams { beta: std::f64::consts::E, b_field: 0.0 }).unwrap();
        assert!((v - (-two_pi.ln() - 1.0 - 0.5)).abs() < 1e-14);
        assert!(log_prior(&ModelParams { beta: -0.5, b_field: 0.0 }).is_err());
    }

    #[test]
    fn joint_is_lik_plus_prior() {
        let a = scaled_adjacency(&random_regular_edges(20, 4, 1).unwrap()).unwrap();
        let x = SpinConfiguration::from_bits(20, 0x5A5A5);
        let t = ModelParams { beta: 1.0, b_field: 0.0 };
        let want = pseudo_log_lik(&t, &a, &x).unwrap() - (2.0 * std::f64::consts::PI).ln();
        assert!((log_joint(&t, &a, &x).unwrap() - want).abs() < 1e-12);
        for beta in [1e-8, 1e3] {
            assert!(log_joint(&ModelParams { beta, b_field: 0.3 }, &a, &x).unwrap().is_finite());
        }
    }

    #[test]
    fn joint_increases_in_b_for_all_plus() {
        // d/dB log pi = sum x_i - sum tanh(beta m_i + B) - B; at B = 0 with all
        // spins +1 and unit row sums this is n (1 - tanh(beta)) > 0
        let a = scaled_adjacency(&random_regular_edges(30, 4, 2).unwrap()).unwrap();
        let x = SpinConfiguration::uniform(30, 1).unwrap();
        let at = |b| log_joint(&ModelParams { beta: 0.5, b_field: b }, &a, &x).unwrap();
        assert!(at(0.01) > at(0.0) && at(0.0) > at(-0.01));
    }

    #[test]
    fn z_form_matches_theta_form() {
        let a = scaled_adjacency(&random_regular_edges(30, 4, 3).unwrap()).unwrap();
        let x = SpinConfiguration::from_bits(30, 0x1234_5678);
        let post = PseudoPosterior::new(&a, &x).unwrap();
        for &(beta, b) in &[(0.3, 0.2), (2.0, -1.0)] {
            let t = ModelParams { beta, b_field: b };
            let want = log_joint(&t, &a, &x).unwrap() + beta.ln();
            assert!((post.log_joint_z([beta.ln(), b]) - want).abs() < 1e-9);
        }
    }
}
