use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::NoiseRate;
use crate::par::{self, Exec};
use crate::seed;

/// Probability that the XOR of `s` labels, each flipped independently with
/// probability `eta`, equals the XOR of the true labels: `1/2 + 1/2 (1 - 2η)^s`.
pub fn predicted_bias(eta: NoiseRate, s: u64) -> Result<f64> {
    if s == 0 {
        return Err(Error::ZeroCount("s"));
    }
    let base = 1.0 - 2.0 * eta.get();
    Ok(0.5 + 0.5 * pow(base, s))
}

fn pow(base: f64, s: u64) -> f64 {
    match i32::try_from(s) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(s as f64),
    }
}

const ORACLE_LANES: usize = 64;

/// Monte Carlo estimate of [`predicted_bias`]: chains `s` independent
/// Bernoulli(η) flips per trial and reports the fraction of trials with an even
/// number of flips.
pub fn xor_chain_oracle(eta: NoiseRate, s: u64, trials: u64, seed: u64) -> Result<f64> {
    xor_chain_oracle_with(Exec::default(), eta, s, trials, seed)
}

pub fn xor_chain_oracle_with(exec: Exec, eta: NoiseRate, s: u64, trials: u64, seed: u64) -> Result<f64> {
    if s == 0 {
        return Err(Error::ZeroCount("s"));
    }
    if trials == 0 {
        return Err(Error::ZeroCount("trials"));
    }
    let eta = eta.get();
    let chunks = par::chunk_sizes(trials, ORACLE_LANES);
    let even: u64 = exec
        .map(0..chunks.len(), |lane| {
            let mut rng = seed::rng(seed::lane(seed, lane as u64));
            let mut even = 0u64;
            for _ in 0..chunks[lane] {
                let mut parity = false;
                for _ in 0..s {
                    parity ^= rng.gen::<f64>() < eta;
                }
                even += u64::from(!parity);
            }
            even
        })
        .into_iter()
        .sum();
    Ok(even as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta(x: f64) -> NoiseRate {
        NoiseRate::new(x).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        for e in [0.0, 0.1, 0.3, 0.49] {
            assert!((predicted_bias(eta(e), 1).unwrap() - (1.0 - e)).abs() < 1e-15);
        }
        for s in [1, 7, 1000] {
            assert_eq!(predicted_bias(eta(0.0), s).unwrap(), 1.0);
        }
        assert!((predicted_bias(eta(0.25), 3).unwrap() - 0.5625).abs() < 1e-15);
        assert!((predicted_bias(eta(0.25), 5).unwrap() - 0.515625).abs() < 1e-15);
        assert_eq!(predicted_bias(eta(0.25), 0), Err(Error::ZeroCount("s")));
    }

    #[test]
    fn recurrence_holds() {
        // p_s = (1-η) p_{s-1} + η (1 - p_{s-1})
        for e in [0.05, 0.2, 0.4] {
            let mut p = 1.0 - e;
            for s in 2..40 {
                p = (1.0 - e) * p + e * (1.0 - p);
                assert!((predicted_bias(eta(e), s).unwrap() - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let n = 1_000_000;
        let p = xor_chain_oracle(eta(0.499), 1, 200_000, 1).unwrap();
        assert!((p - 0.501).abs() < 3.0 * (0.25f64 / 200_000.0).sqrt());
        assert_eq!(xor_chain_oracle(eta(0.0), 1000, 1000, 2).unwrap(), 1.0);
        let p = xor_chain_oracle(eta(0.25), 5, n, 3).unwrap();
        let expected = 0.515625;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((p - expected).abs() <= 3.0 * sigma, "{p}");
        assert!(xor_chain_oracle(eta(0.25), 5, 0, 3).is_err());
        assert!(xor_chain_oracle(eta(0.25), 0, 10, 3).is_err());
    }

    #[test]
    fn oracle_is_exec_independent() {
        let a = xor_chain_oracle_with(Exec::Sequential, eta(0.3), 4, 10_000, 9).unwrap();
        let b = xor_chain_oracle_with(Exec::Parallel, eta(0.3), 4, 10_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
