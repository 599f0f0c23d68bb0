//! Pseudo-maximum-likelihood estimation of `(beta, B)`.
//!
//! Safeguarded Newton ascent on the pseudo-log-likelihood in the original
//! `(beta, B)` coordinates, where its negative Hessian is positive
//! semi-definite. Iterates are projected onto the box
//! `[beta_floor, beta_cap] x [-b_cap, b_cap]`.

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::error::{param_err, Error, Result};
use crate::model::{
    local_fields, HessianMatrix, ModelParams, PseudoLikelihood, ScoreVector, SpinConfiguration,
};

/// Determinant below which the Newton system is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PmleConfig {
    /// Tolerance on the L2 norm of the (projected) score.
    pub tol: f64,
    pub max_iters: usize,
    pub beta_floor: f64,
    pub beta_cap: f64,
    pub b_cap: f64,
    pub init: ModelParams,
}

impl Default for PmleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 100,
            beta_floor: 1e-6,
            beta_cap: 20.0,
            b_cap: 20.0,
            init: ModelParams {
                beta: 0.5,
                b_field: 0.0,
            },
        }
    }
}

impl PmleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.beta_floor > 0.0) {
            return Err(param_err("tol and beta_floor must be positive"));
        }
        if !(self.beta_cap > self.beta_floor && self.b_cap > 0.0) {
            return Err(param_err("empty parameter box"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmleResult {
    pub theta: ModelParams,
    pub iterations: usize,
    pub score_norm: f64,
    /// Some bound of the parameter box is active at `theta`.
    pub boundary: bool,
    pub log_lik: f64,
    /// Pseudo-log-likelihood after each accepted step, starting at the initial point.
    pub path: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Active {
    beta: bool,
    b: bool,
}

impl Active {
    fn any(self) -> bool {
        self.beta || self.b
    }
}

fn active_bounds(theta: &ModelParams, w: &ScoreVector, cfg: &PmleConfig) -> Active {
    Active {
        beta: (theta.beta <= cfg.beta_floor && w.w1 < 0.0)
            || (theta.beta >= cfg.beta_cap && w.w1 > 0.0),
        b: (theta.b_field <= -cfg.b_cap && w.w2 < 0.0) || (theta.b_field >= cfg.b_cap && w.w2 > 0.0),
    }
}

fn project(beta: f64, b: f64, cfg: &PmleConfig) -> ModelParams {
    ModelParams {
        beta: beta.clamp(cfg.beta_floor, cfg.beta_cap),
        b_field: b.clamp(-cfg.b_cap, cfg.b_cap),
    }
}

/// Newton direction restricted to the free coordinates, or the projected
/// gradient when the restricted system is singular.
fn direction(w: &ScoreVector, h: &HessianMatrix, act: Active) -> [f64; 2] {
    let g = [
        if act.beta { 0.0 } else { w.w1 },
        if act.b { 0.0 } else { w.w2 },
    ];
    match (act.beta, act.b) {
        (false, false) => h.solve(g, SINGULAR_DET).unwrap_or(g),
        (true, false) if h.c > SINGULAR_DET => [0.0, g[1] / h.c],
        (false, true) if h.a > SINGULAR_DET => [g[0] / h.a, 0.0],
        _ => g,
    }
}

fn projected_norm(w: &ScoreVector, act: Active) -> f64 {
    let a = if act.beta { 0.0 } else { w.w1 };
    let b = if act.b { 0.0 } else { w.w2 };
    a.hypot(b)
}

/// Direction along which the pseudo-log-likelihood increases without bound,
/// if there is one.
///
/// Each spin contributes `log sigmoid(2 x_i (beta m_i + B))`, so log L is
/// unbounded above exactly when some `d` has `x_i (d_beta m_i + d_B) >= 0`
/// for every site with at least one strict inequality: the vectors
/// `x_i (m_i, 1)` then all lie in a closed half-plane.
pub fn divergent_direction(fields: &[f64], x: &SpinConfiguration) -> Option<[f64; 2]> {
    use std::f64::consts::{PI, TAU};
    let mut angles: Vec<f64> = fields
        .iter()
        .zip(x.spins())
        .map(|(&m, &s)| {
            let s = f64::from(s);
            (s * 1.0).atan2(s * m).rem_euclid(TAU)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let (mut gap, mut after) = (TAU - angles[angles.len() - 1] + angles[0], angles[0]);
    for w in angles.windows(2) {
        if w[1] - w[0] > gap {
            gap = w[1] - w[0];
            after = w[1];
        }
    }
    if gap < PI - 1e-12 {
        return None;
    }
    // bisector of the occupied arc, which starts at `after` and spans TAU - gap
    let phi = after + 0.5 * (TAU - gap);
    let d = [phi.cos(), phi.sin()];
    let strict = angles.iter().any(|&a| (a - phi).cos() > 1e-9);
    strict.then_some(d)
}

pub fn pmle_fit(a: &CouplingMatrix, x: &SpinConfiguration, cfg: &PmleConfig) -> Result<PmleResult> {
    cfg.validate()?;
    let pl = PseudoLikelihood::new(a, x)?;
    if let Some(d) = divergent_direction(&local_fields(a, x)?, x) {
        return Ok(walk_to_box(&pl, d, cfg));
    }
    newton(&pl, cfg)
}

/// Follows `d` from the initial point until the first bound of the box.
fn walk_to_box(pl: &PseudoLikelihood, d: [f64; 2], cfg: &PmleConfig) -> PmleResult {
    let start = project(cfg.init.beta, cfg.init.b_field, cfg);
    let reach = |from: f64, dir: f64, lo: f64, hi: f64| {
        if dir > 0.0 {
            (hi - from) / dir
        } else if dir < 0.0 {
            (lo - from) / dir
        } else {
            f64::INFINITY
        }
    };
    let t = reach(start.beta, d[0], cfg.beta_floor, cfg.beta_cap)
        .min(reach(start.b_field, d[1], -cfg.b_cap, cfg.b_cap));
    let theta = project(start.beta + t * d[0], start.b_field + t * d[1], cfg);
    let w = pl.score(theta.beta, theta.b_field);
    let log_lik = pl.log_lik(theta.beta, theta.b_field);
    PmleResult {
        theta,
        iterations: 0,
        score_norm: w.norm(),
        boundary: true,
        log_lik,
        path: vec![pl.log_lik(start.beta, start.b_field), log_lik],
    }
}

fn newton(pl: &PseudoLikelihood, cfg: &PmleConfig) -> Result<PmleResult> {
    let mut theta = project(cfg.init.beta, cfg.init.b_field, cfg);
    let mut value = pl.log_lik(theta.beta, theta.b_field);
    let mut path = vec![value];
    let mut reached = cfg.max_iters;
    for iter in 0..=cfg.max_iters {
        let w = pl.score(theta.beta, theta.b_field);
        let act = active_bounds(&theta, &w, cfg);
        let norm = projected_norm(&w, act);
        if norm <= cfg.tol {
            return Ok(PmleResult {
                theta,
                iterations: iter,
                score_norm: norm,
                boundary: act.any(),
                log_lik: value,
                path,
            });
        }
        if iter == cfg.max_iters {
            break;
        }
        let h = pl.hessian(theta.beta, theta.b_field);
        let d = direction(&w, &h, act);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = project(theta.beta + step * d[0], theta.b_field + step * d[1], cfg);
            let moved = [cand.beta - theta.beta, cand.b_field - theta.b_field];
            if moved == [0.0, 0.0] {
                break;
            }
            let v = pl.log_lik(cand.beta, cand.b_field);
            if v >= value + ARMIJO * w.dot(moved) {
                accepted = Some((cand, v));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, v)) => {
                theta = cand;
                value = v;
                path.push(v);
            }
            None => {
                // Roundoff floor: no step increases log L measurably. A full
                // Newton step that shrinks the score is still progress towards
                // the stationary point.
                let cand = project(theta.beta + d[0], theta.b_field + d[1], cfg);
                let wc = pl.score(cand.beta, cand.b_field);
                let act_c = active_bounds(&cand, &wc, cfg);
                if projected_norm(&wc, act_c) < norm {
                    theta = cand;
                    value = pl.log_lik(cand.beta, cand.b_field);
                } else {
                    reached = iter;
                    break;
                }
            }
        }
    }
    Err(Error::Convergence {
        iterations: reached,
        last: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{random_regular_edges, scaled_adjacency};
    use crate::model::{hessian, score};
    use crate::sampler::{mh_sample, MhConfig};

    fn instance(n: usize, d: usize, beta: f64, b: f64, seed: u64) -> (CouplingMatrix, SpinConfiguration) {
        let a = scaled_adjacency(&random_regular_edges(n, d, seed).unwrap()).unwrap();
        let x = mh_sample(&ModelParams::new(beta, b).unwrap(), &a, &MhConfig::new(50_000, seed)).unwrap();
        (a, x)
    }

    #[test]
    fn converges_to_stationary_point() {
        for seed in 0..10 {
            let (a, x) = instance(100, 10, 0.4, 0.2, seed);
            let r = pmle_fit(&a, &x, &PmleConfig::default()).unwrap();
            if r.boundary {
                continue;
            }
            let s = score(&r.theta, &a, &x).unwrap();
            assert!(s.norm() <= 1e-8, "seed {seed}: {}", s.norm());
            let h = hessian(&r.theta, &a, &x).unwrap();
            assert!(h.min_eigenvalue() >= -1e-10);
            for pair in r.path.windows(2) {
                assert!(pair[1] >= pair[0]);
            }
        }
    }

    #[test]
    fn deterministic() {
        let (a, x) = instance(100, 10, 0.4, -0.3, 3);
        let r1 = pmle_fit(&a, &x, &PmleConfig::default()).unwrap();
        let r2 = pmle_fit(&a, &x, &PmleConfig::default()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn all_plus_hits_boundary() {
        let a = scaled_adjacency(&random_regular_edges(50, 4, 1).unwrap()).unwrap();
        let x = SpinConfiguration::uniform(50, 1).unwrap();
        let r = pmle_fit(&a, &x, &PmleConfig::default()).unwrap();
        assert!(r.boundary);
        assert!(r.theta.b_field > 0.0);
        assert!(r.theta.beta + r.theta.b_field > 5.0);

        let x = SpinConfiguration::uniform(50, -1).unwrap();
        let r = pmle_fit(&a, &x, &PmleConfig::default()).unwrap();
        assert!(r.boundary);
        assert!(r.theta.b_field < 0.0);
    }

    #[test]
    fn divergence_detection() {
        let x = SpinConfiguration::new(vec![1, 1, -1, -1]).unwrap();
        // x_i (m_i, 1) = (1,1), (1,1), (1,-1), (1,-1): all in the right half-plane
        let d = divergent_direction(&[1.0, 1.0, -1.0, -1.0], &x).unwrap();
        assert!(d[0] > 0.9 && d[1].abs() < 1e-9);
        // adding a site with vector (-1, 1) and one with (0, -1) closes the half-plane
        let x = SpinConfiguration::new(vec![1, 1, -1, -1, 1, -1]).unwrap();
        assert!(divergent_direction(&[1.0, 1.0, -1.0, -1.0, -1.0, 0.0], &x).is_none());
        // a mixed MH sample is never separable
        let (a, x) = instance(100, 10, 0.4, 0.2, 7);
        assert!(divergent_direction(&local_fields(&a, &x).unwrap(), &x).is_none());
    }

    #[test]
    fn rejects_bad_config() {
        let (a, x) = instance(20, 4, 0.4, 0.2, 1);
        let cfg = PmleConfig { tol: 0.0, ..PmleConfig::default() };
        assert!(pmle_fit(&a, &x, &cfg).is_err());
        let cfg = PmleConfig { beta_floor: -1.0, ..PmleConfig::default() };
        assert!(pmle_fit(&a, &x, &cfg).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let (a, x) = instance(100, 10, 0.4, 0.2, 2);
        let cfg = PmleConfig { max_iters: 1, tol: 1e-14, ..PmleConfig::default() };
        match pmle_fit(&a, &x, &cfg) {
            Err(Error::Convergence { iterations, last }) => {
                assert_eq!(iterations, 1);
                assert!(last.beta > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
