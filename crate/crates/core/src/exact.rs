//! Exhaustive enumeration of the true Ising likelihood for small `n`.

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::model::{check_dims, ModelParams, SpinConfiguration};
use crate::sampler::energy;

/// Largest `n` accepted by the enumeration routines.
pub const MAX_EXACT_N: usize = 22;

fn check_capacity(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::Capacity { n, max });
    }
    Ok(())
}

/// Calls `visit(bits, energy)` for every configuration, in Gray-code order.
///
/// Bit `i` of `bits` set means spin `i` is `+1`. Energies are updated
/// incrementally after each single-spin flip.
fn for_each_state(theta: &ModelParams, a: &CouplingMatrix, mut visit: impl FnMut(u64, f64)) {
    let n = a.n();
    let mut x = SpinConfiguration::uniform(n, -1).expect("valid spins");
    let mut fields: Vec<f64> = (0..n).map(|i| -a.row_sum(i)).collect();
    let mut h = energy(theta, a, &x).expect("matching dimensions");
    let mut bits = 0u64;
    visit(bits, h);
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let xi = x.get(i);
        h += -2.0 * xi * (theta.beta * fields[i] + theta.b_field);
        x.flip(i);
        for &(j, w) in a.row(i) {
            fields[j] -= 2.0 * w * xi;
        }
        bits ^= 1 << i;
        visit(bits, h);
    }
}

/// `log Z_n(beta, B)` by exhaustive summation.
pub fn log_partition(theta: &ModelParams, a: &CouplingMatrix) -> Result<f64> {
    check_capacity(a.n(), MAX_EXACT_N)?;
    // running log-sum-exp: value = max + ln(acc)
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for_each_state(theta, a, |_, h| {
        if h > max {
            acc = acc * (max - h).exp() + 1.0;
            max = h;
        } else {
            acc += (h - max).exp();
        }
    });
    Ok(max + acc.ln())
}

/// Exact log-likelihood `H(x) - log Z_n`.
pub fn exact_log_lik(theta: &ModelParams, a: &CouplingMatrix, x: &SpinConfiguration) -> Result<f64> {
    check_dims(a, x)?;
    let log_z = log_partition(theta, a)?;
    Ok(energy(theta, a, x)? - log_z)
}

/// Normalised probabilities of all `2^n` configurations, indexed by bits.
pub fn state_probabilities(theta: &ModelParams, a: &CouplingMatrix, max_n: usize) -> Result<Vec<f64>> {
    check_capacity(a.n(), max_n.min(MAX_EXACT_N))?;
    let mut h = vec![0.0; 1 << a.n()];
    for_each_state(theta, a, |bits, e| h[bits as usize] = e);
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in &mut h {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in &mut h {
        *v /= total;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{random_regular_edges, scaled_adjacency};
    use crate::model::pseudo_log_lik;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_coupling(n: usize, seed: u64) -> CouplingMatrix {
        let mut rng = stream_rng(seed, 1);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.4) {
                    entries.push((i, j, rng.random_range(0.05..0.8)));
                }
            }
        }
        CouplingMatrix::from_weighted_edges(n, entries).unwrap()
    }

    #[test]
    fn single_site() {
        let a = CouplingMatrix::zeros(1);
        let t = ModelParams::new(0.7, 0.4).unwrap();
        let plus = SpinConfiguration::new(vec![1]).unwrap();
        let p = exact_log_lik(&t, &a, &plus).unwrap().exp();
        let want = 0.4f64.exp() / (0.4f64.exp() + (-0.4f64).exp());
        assert!((p - want).abs() < 1e-15);
    }

    #[test]
    fn independent_spins_match_pseudo_likelihood() {
        let a = random_coupling(8, 3);
        let t = ModelParams { beta: 0.0, b_field: 0.35 };
        for bits in [0u64, 5, 77, 255] {
            let x = SpinConfiguration::from_bits(8, bits);
            let e = exact_log_lik(&t, &a, &x).unwrap();
            let p = pseudo_log_lik(&t, &a, &x).unwrap();
            assert!((e - p).abs() < 1e-12);
        }
    }

    #[test]
    fn normalises_to_one() {
        for seed in 0..3 {
            let a = random_coupling(10, seed);
            let t = ModelParams::new(0.9, -0.3).unwrap();
            let total: f64 = (0..1024u64)
                .map(|b| exact_log_lik(&t, &a, &SpinConfiguration::from_bits(10, b)).unwrap().exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "{total}");
        }
    }

    #[test]
    fn partition_matches_naive_sum() {
        let a = scaled_adjacency(&random_regular_edges(12, 3, 4).unwrap()).unwrap();
        let t = ModelParams::new(1.3, 0.2).unwrap();
        let naive: f64 = (0..1u64 << 12)
            .map(|b| energy(&t, &a, &SpinConfiguration::from_bits(12, b)).unwrap().exp())
            .sum();
        assert!((log_partition(&t, &a).unwrap() - naive.ln()).abs() < 1e-10);
        let probs = state_probabilities(&t, &a, 20).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let x = SpinConfiguration::from_bits(12, 0b1010_0110_0001);
        let lp = exact_log_lik(&t, &a, &x).unwrap();
        assert!((probs[x.to_bits() as usize].ln() - lp).abs() < 1e-10);
    }

    #[test]
    fn capacity_error() {
        let a = CouplingMatrix::zeros(23);
        let t = ModelParams::new(1.0, 0.0).unwrap();
        assert!(matches!(log_partition(&t, &a), Err(Error::Capacity { n: 23, max: 22 })));
        assert!(matches!(
            state_probabilities(&t, &CouplingMatrix::zeros(21), 20),
            Err(Error::Capacity { .. })
        ));
    }
}
