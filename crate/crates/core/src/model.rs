//! Deterministic Ising-model quantities built on the pseudo-likelihood.
//!
//! For spins `x`, coupling `A` and parameters `(beta, B)` the local field of
//! site `i` is `m_i = sum_j A(i,j) x_j`. The pseudo-log-likelihood is
//!
//! ```text
//! log L(beta, B) = -n log 2 + sum_i (beta x_i m_i + B x_i - log cosh(beta m_i + B))
//! ```
//!
//! and its derivatives only involve `tanh` and `sech^2` of `beta m_i + B`.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::error::{param_err, Error, Result};

/// A configuration of `n` spins, each exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(param_err(format!(
                "spin {pos} has value {}, expected -1 or +1",
                spins[pos]
            )));
        }
        Ok(Self(spins))
    }

    pub fn uniform(n: usize, spin: i8) -> Result<Self> {
        Self::new(vec![spin; n])
    }

    /// Spin `i` is `+1` when bit `i` of `bits` is set.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Sum of spins.
    pub fn magnetization(&self) -> i64 {
        self.0.iter().map(|&s| i64::from(s)).sum()
    }

    /// One line of space-separated `1` / `-1`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{self}")?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut spins = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            for tok in line?.split_whitespace() {
                let s = match tok {
                    "1" | "+1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: format!("`{other}` is not a spin value"),
                        })
                    }
                };
                spins.push(s);
            }
        }
        Self::new(spins)
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Inverse temperature `beta > 0` and external field `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub b_field: f64,
}

impl ModelParams {
    /// `B = 0` is accepted; the consistency theory assumes `B != 0` but every
    /// quantity here is still well defined there.
    pub fn new(beta: f64, b_field: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be finite and > 0, got {beta}")));
        }
        if !b_field.is_finite() {
            return Err(Error::Domain(format!("B must be finite, got {b_field}")));
        }
        Ok(Self { beta, b_field })
    }

    pub fn distance(&self, other: &ModelParams) -> f64 {
        (self.beta - other.beta).hypot(self.b_field - other.b_field)
    }

    pub fn squared_error(&self, truth: &ModelParams) -> f64 {
        (self.beta - truth.beta).powi(2) + (self.b_field - truth.b_field).powi(2)
    }
}

/// Gradient of the pseudo-log-likelihood in `(beta, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreVector {
    pub w1: f64,
    pub w2: f64,
}

impl ScoreVector {
    pub fn norm(&self) -> f64 {
        self.w1.hypot(self.w2)
    }

    pub fn dot(&self, d: [f64; 2]) -> f64 {
        self.w1 * d[0] + self.w2 * d[1]
    }
}

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.c);
        let rad = (0.5 * (self.a - self.c)).hypot(self.b);
        (mid + rad, mid - rad)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().1
    }

    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        self.a * v[0] * v[0] + 2.0 * self.b * v[0] * v[1] + self.c * v[1] * v[1]
    }

    /// Solves `M z = rhs`; `None` when `|det| <= det_floor`.
    pub fn solve(&self, rhs: [f64; 2], det_floor: f64) -> Option<[f64; 2]> {
        let det = self.det();
        if !(det.abs() > det_floor) {
            return None;
        }
        Some([
            (self.c * rhs[0] - self.b * rhs[1]) / det,
            (self.a * rhs[1] - self.b * rhs[0]) / det,
        ])
    }
}

/// Negative Hessian of the pseudo-log-likelihood.
pub type HessianMatrix = Sym2;

/// Third-order coefficient matrices of the pseudo-log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderMatrices {
    pub r1: Sym2,
    pub r2: Sym2,
}

impl RemainderMatrices {
    /// `d_beta * d'R1 d + d_B * d'R2 d`, equal to `sum_i (h_i - h_i^3)(m_i d_beta + d_B)^3`.
    ///
    /// One third of this, evaluated at an intermediate point, is the
    /// Lagrange remainder of the second-order expansion of `log L`.
    pub fn cubic_form(&self, d: [f64; 2]) -> f64 {
        d[0] * self.r1.quad_form(d) + d[1] * self.r2.quad_form(d)
    }
}

/// `log cosh(a)` without overflow for large `|a|`.
pub fn log_cosh(a: f64) -> f64 {
    let t = a.abs();
    t + (-2.0 * t).exp().ln_1p() - std::f64::consts::LN_2
}

pub(crate) fn check_dims(a: &CouplingMatrix, x: &SpinConfiguration) -> Result<()> {
    if a.n() != x.len() {
        return Err(param_err(format!(
            "coupling matrix is {}x{} but configuration has {} spins",
            a.n(),
            a.n(),
            x.len()
        )));
    }
    Ok(())
}

/// Local fields `m_i = sum_j A(i,j) x_j`.
pub fn local_fields(a: &CouplingMatrix, x: &SpinConfiguration) -> Result<Vec<f64>> {
    check_dims(a, x)?;
    Ok((0..a.n())
        .map(|i| a.row(i).iter().map(|&(j, w)| w * x.get(j)).sum())
        .collect())
}

/// `P(X_i = +1 | rest) = (1 + tanh(beta m_i + B)) / 2`.
pub fn conditional_prob_plus(theta: &ModelParams, m_i: f64) -> f64 {
    0.5 * (1.0 + (theta.beta * m_i + theta.b_field).tanh())
}

/// `log P(X_i = x_i | rest)`, computed without cancellation.
pub fn log_conditional(theta: &ModelParams, m_i: f64, x_i: f64) -> f64 {
    let a = theta.beta * m_i + theta.b_field;
    x_i * a - log_cosh(a) - std::f64::consts::LN_2
}

pub fn pseudo_log_lik(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<f64> {
    let m = local_fields(a, x)?;
    Ok(m.iter()
        .enumerate()
        .map(|(i, &mi)| log_conditional(theta, mi, x.get(i)))
        .sum())
}

pub fn score(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<ScoreVector> {
    let m = local_fields(a, x)?;
    let (mut w1, mut w2) = (0.0, 0.0);
    for (i, &mi) in m.iter().enumerate() {
        let r = x.get(i) - (theta.beta * mi + theta.b_field).tanh();
        w1 += mi * r;
        w2 += r;
    }
    Ok(ScoreVector { w1, w2 })
}

/// `sech^2(a)` evaluated as `1 - tanh^2` would lose precision near 1; this
/// form stays accurate for large `|a|`.
fn sech2(a: f64) -> f64 {
    let e = (-2.0 * a.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

pub fn hessian(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<HessianMatrix> {
    let m = local_fields(a, x)?;
    let mut h = Sym2::default();
    for &mi in &m {
        let s = sech2(theta.beta * mi + theta.b_field);
        h.a += mi * mi * s;
        h.b += mi * s;
        h.c += s;
    }
    Ok(h)
}

pub fn remainder_matrices(
    theta: &ModelParams,
    a: &CouplingMatrix,
    x: &SpinConfiguration,
) -> Result<RemainderMatrices> {
    let m = local_fields(a, x)?;
    let (mut p0, mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0, 0.0);
    for &mi in &m {
        let h = (theta.beta * mi + theta.b_field).tanh();
        let g = h - h * h * h;
        p0 += g;
        p1 += mi * g;
        p2 += mi * mi * g;
        p3 += mi * mi * mi * g;
    }
    Ok(RemainderMatrices {
        r1: Sym2 { a: p3, b: p2, c: p1 },
        r2: Sym2 { a: p2, b: p1, c: p0 },
    })
}

/// Empirical variance of the local fields.
pub fn tn_statistic(a: &CouplingMatrix, x: &SpinConfiguration) -> Result<f64> {
    let m = local_fields(a, x)?;
    let n = m.len() as f64;
    if m.is_empty() {
        return Ok(0.0);
    }
    let mean = m.iter().sum::<f64>() / n;
    Ok(m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// Lower bound on the smallest eigenvalue of the Hessian at `theta`:
/// `sech^4(beta gamma + |B|) / (1 + gamma^2) * n * T_n(x)`.
pub fn hessian_eigenvalue_bound(theta: &ModelParams, gamma: f64, n: usize, tn: f64) -> f64 {
    let s = sech2(theta.beta * gamma + theta.b_field.abs());
    s * s / (1.0 + gamma * gamma) * n as f64 * tn
}

/// Pseudo-log-likelihood compressed to sufficient statistics.
///
/// `log L` depends on the data only through `sum_i x_i m_i`, `sum_i x_i` and
/// the multiset of local fields. Graphs with uniform weights have few
/// distinct field values, so repeated evaluation (variational fits, PMLE)
/// costs `O(levels)` instead of `O(n)`.
#[derive(Debug, Clone)]
pub struct PseudoLikelihood {
    n: usize,
    sum_xm: f64,
    sum_x: f64,
    /// Distinct local-field values and their multiplicities.
    levels: Vec<(f64, f64)>,
}

impl PseudoLikelihood {
    pub fn new(a: &CouplingMatrix, x: &SpinConfiguration) -> Result<Self> {
        let m = local_fields(a, x)?;
        let sum_xm = m.iter().enumerate().map(|(i, &mi)| x.get(i) * mi).sum();
        let sum_x = x.magnetization() as f64;
        let mut sorted = m.clone();
        sorted.sort_by(f64::total_cmp);
        let mut levels: Vec<(f64, f64, f64)> = Vec::new();
        for v in sorted {
            match levels.last_mut() {
                Some((first, sum, count)) if (v - *first).abs() <= 1e-12 * first.abs().max(1.0) => {
                    *sum += v;
                    *count += 1.0;
                }
                _ => levels.push((v, v, 1.0)),
            }
        }
        Ok(Self {
            n: m.len(),
            sum_xm,
            sum_x,
            levels: levels.into_iter().map(|(_, s, c)| (s / c, c)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn log_lik(&self, beta: f64, b: f64) -> f64 {
        let lc: f64 = self
            .levels
            .iter()
            .map(|&(m, c)| c * log_cosh(beta * m + b))
            .sum();
        beta * self.sum_xm + b * self.sum_x - lc - self.n as f64 * std::f64::consts::LN_2
    }

    pub fn score(&self, beta: f64, b: f64) -> ScoreVector {
        let (mut t1, mut t2) = (0.0, 0.0);
        for &(m, c) in &self.levels {
            let h = c * (beta * m + b).tanh();
            t1 += m * h;
            t2 += h;
        }
        ScoreVector {
            w1: self.sum_xm - t1,
            w2: self.sum_x - t2,
        }
    }

    pub fn hessian(&self, beta: f64, b: f64) -> HessianMatrix {
        let mut h = Sym2::default();
        for &(m, c) in &self.levels {
            let s = c * sech2(beta * m + b);
            h.a += m * m * s;
            h.b += m * s;
            h.c += s;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{lattice4_adjacency, random_regular_edges, scaled_adjacency};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_spins(n: usize, seed: u64) -> SpinConfiguration {
        let mut rng = stream_rng(seed, 9);
        SpinConfiguration::new((0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
            .unwrap()
    }

    fn regular(n: usize, d: usize, seed: u64) -> CouplingMatrix {
        scaled_adjacency(&random_regular_edges(n, d, seed).unwrap()).unwrap()
    }

    #[test]
    fn spins_validate() {
        assert!(SpinConfiguration::new(vec![1, -1, 0]).is_err());
        let x = SpinConfiguration::from_bits(4, 0b0101);
        assert_eq!(x.spins(), &[1, -1, 1, -1]);
        assert_eq!(x.to_bits(), 0b0101);
    }

    #[test]
    fn spins_text_round_trip() {
        let x = random_spins(17, 3);
        let mut buf = Vec::new();
        x.write_text(&mut buf).unwrap();
        assert_eq!(SpinConfiguration::read_text(buf.as_slice()).unwrap(), x);
        assert!(SpinConfiguration::read_text("1 -1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn params_reject_nonpositive_beta() {
        assert!(ModelParams::new(0.0, 0.1).is_err());
        assert!(ModelParams::new(-0.5, 0.1).is_err());
        assert!(ModelParams::new(0.5, f64::NAN).is_err());
        assert!(ModelParams::new(0.5, 0.0).is_ok());
    }

    #[test]
    fn fields_all_plus_regular() {
        let a = regular(40, 4, 1);
        let x = SpinConfiguration::uniform(40, 1).unwrap();
        for m in local_fields(&a, &x).unwrap() {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fields_two_sites() {
        let a = CouplingMatrix::from_weighted_edges(2, [(0, 1, 1.0)]).unwrap();
        let x = SpinConfiguration::new(vec![1, -1]).unwrap();
        assert_eq!(local_fields(&a, &x).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn fields_bounded_by_gamma_on_lattice() {
        let a = lattice4_adjacency(3, 3).unwrap();
        for seed in 0..50 {
            for m in local_fields(&a, &random_spins(9, seed)).unwrap() {
                assert!(m.abs() <= 1.5 + 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let a = regular(10, 2, 0);
        let x = random_spins(9, 0);
        assert!(local_fields(&a, &x).is_err());
        let t = ModelParams::new(1.0, 0.0).unwrap();
        assert!(pseudo_log_lik(&t, &a, &x).is_err());
        assert!(score(&t, &a, &x).is_err());
        assert!(hessian(&t, &a, &x).is_err());
        assert!(remainder_matrices(&t, &a, &x).is_err());
        assert!(tn_statistic(&a, &x).is_err());
    }

    #[test]
    fn conditional_prob_cases() {
        let t = ModelParams::new(2.0, 0.0).unwrap();
        assert_eq!(conditional_prob_plus(&t, 0.0), 0.5);
        let t = ModelParams::new(1.0, 0.0).unwrap();
        let mut prev = 0.0;
        for k in 0..40 {
            let p = conditional_prob_plus(&t, k as f64 * 0.5);
            assert!(p >= prev && p <= 1.0);
            prev = p;
        }
        assert!(prev > 1.0 - 1e-15);
        let t = ModelParams::new(0.5, 0.3).unwrap();
        let a: f64 = 0.5 * 0.4 + 0.3;
        let direct = a.exp() / (a.exp() + (-a).exp());
        assert!((conditional_prob_plus(&t, 0.4) - direct).abs() < 1e-15);
        assert!((conditional_prob_plus(&t, 0.4) - 0.5 * (1.0 + 0.5f64.tanh())).abs() < 1e-15);
    }

    #[test]
    fn pseudo_log_lik_at_zero_params() {
        let a = regular(30, 3, 2);
        let x = random_spins(30, 2);
        let t = ModelParams { beta: 0.0, b_field: 0.0 };
        let v = pseudo_log_lik(&t, &a, &x).unwrap();
        assert!((v + 30.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn pseudo_log_lik_is_sum_of_conditionals() {
        let a = regular(30, 5, 4);
        let x = random_spins(30, 5);
        let t = ModelParams::new(0.8, -0.4).unwrap();
        let m = local_fields(&a, &x).unwrap();
        let direct: f64 = m
            .iter()
            .enumerate()
            .map(|(i, &mi)| {
                let p = conditional_prob_plus(&t, mi);
                if x.spins()[i] == 1 { p.ln() } else { (1.0 - p).ln() }
            })
            .sum();
        assert!((pseudo_log_lik(&t, &a, &x).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn log_cosh_is_stable() {
        assert!(log_cosh(800.0).is_finite());
        assert!((log_cosh(800.0) - (800.0 - std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(log_cosh(-800.0), log_cosh(800.0));
        assert!((log_cosh(0.3) - 0.3f64.cosh().ln()).abs() < 1e-15);
        assert_eq!(log_cosh(0.0), 0.0);
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        let a = regular(20, 4, 1);
        let x = random_spins(20, 1);
        let t = ModelParams::new(1e4, -1e4).unwrap();
        assert!(pseudo_log_lik(&t, &a, &x).unwrap().is_finite());
        let s = score(&t, &a, &x).unwrap();
        assert!(s.w1.is_finite() && s.w2.is_finite());
        let h = hessian(&t, &a, &x).unwrap();
        assert!(h.a.is_finite() && h.b.is_finite() && h.c.is_finite());
        let r = remainder_matrices(&t, &a, &x).unwrap();
        assert!(r.r1.a.is_finite() && r.r2.c.is_finite());
    }

    #[test]
    fn score_at_zero_params() {
        let a = regular(30, 3, 8);
        let x = random_spins(30, 8);
        let t = ModelParams { beta: 0.0, b_field: 0.0 };
        let s = score(&t, &a, &x).unwrap();
        let m = local_fields(&a, &x).unwrap();
        let xam: f64 = m.iter().enumerate().map(|(i, mi)| mi * x.get(i)).sum();
        assert!((s.w2 - x.magnetization() as f64).abs() < 1e-12);
        assert!((s.w1 - xam).abs() < 1e-12);
    }

    #[test]
    fn hessian_at_zero_params() {
        let a = regular(30, 3, 8);
        let x = random_spins(30, 8);
        let h = hessian(&ModelParams { beta: 0.0, b_field: 0.0 }, &a, &x).unwrap();
        assert_eq!(h.c, 30.0);
    }

    #[test]
    fn remainder_vanishes_at_zero_params() {
        let a = regular(30, 3, 8);
        let x = random_spins(30, 8);
        let r = remainder_matrices(&ModelParams { beta: 0.0, b_field: 0.0 }, &a, &x).unwrap();
        for m in [r.r1, r.r2] {
            assert_eq!((m.a, m.b, m.c), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn tn_cases() {
        let a = regular(40, 4, 3);
        let x = SpinConfiguration::uniform(40, 1).unwrap();
        assert!(tn_statistic(&a, &x).unwrap() < 1e-24);

        // 3x3 lattice, checkerboard x_(r,c) = (-1)^(r+c). Every neighbour of
        // a site has the opposite sign, so m_i = -x_i * deg_i * 9/24.
        let a = lattice4_adjacency(3, 3).unwrap();
        let spins: Vec<i8> = (0..9).map(|v| if (v / 3 + v % 3) % 2 == 0 { 1 } else { -1 }).collect();
        let x = SpinConfiguration::new(spins).unwrap();
        let w = 9.0 / 24.0;
        // corners (+1, deg 2): -2w; edges (-1, deg 3): +3w; centre (+1, deg 4): -4w
        let m = [-2.0 * w, 3.0 * w, -2.0 * w, 3.0 * w, -4.0 * w, 3.0 * w, -2.0 * w, 3.0 * w, -2.0 * w];
        let mean = m.iter().sum::<f64>() / 9.0;
        let var = m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0;
        assert!((tn_statistic(&a, &x).unwrap() - var).abs() < 1e-14);
        assert!(var <= 1.5f64.powi(2));
    }

    #[test]
    fn compressed_matches_direct() {
        for (seed, a) in [(1, regular(200, 10, 1)), (2, lattice4_adjacency(7, 9).unwrap())] {
            let x = random_spins(a.n(), seed);
            let pl = PseudoLikelihood::new(&a, &x).unwrap();
            if seed == 1 {
                assert!(pl.levels() <= 11);
            }
            for &(beta, b) in &[(0.3, 0.2), (1.5, -0.7), (0.01, 2.0)] {
                let t = ModelParams::new(beta, b).unwrap();
                let direct = pseudo_log_lik(&t, &a, &x).unwrap();
                assert!((pl.log_lik(beta, b) - direct).abs() < 1e-9 * direct.abs());
                let s = score(&t, &a, &x).unwrap();
                let sc = pl.score(beta, b);
                assert!((s.w1 - sc.w1).abs() < 1e-9 && (s.w2 - sc.w2).abs() < 1e-9);
                let h = hessian(&t, &a, &x).unwrap();
                let hc = pl.hessian(beta, b);
                assert!((h.a - hc.a).abs() < 1e-9 && (h.b - hc.b).abs() < 1e-9);
                assert!((h.c - hc.c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sym2_eigen() {
        let m = Sym2 { a: 2.0, b: 1.0, c: 2.0 };
        assert_eq!(m.eigenvalues(), (3.0, 1.0));
        let z = m.solve([3.0, 3.0], 1e-14).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
        assert!(Sym2 { a: 1.0, b: 1.0, c: 1.0 }.solve([1.0, 0.0], 1e-14).is_none());
    }
}
