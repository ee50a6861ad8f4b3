//! Poisson-entropy calculus.
//!
//! All entropies are in nats. The Poisson entropy and its derivatives have no
//! closed form; they are evaluated by truncated series with an explicit,
//! recorded tail bound. The derivative identities come from the Poisson
//! forward-difference rule:
//!
//!   H'(lambda)  = E[ln(N+1)] - ln(lambda)
//!   H''(lambda) = E[ln(1 + 1/(N+1))] - 1/lambda  <=  -e^(-lambda)/lambda

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Truncated-series entropy value with an auditable tail bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyValue {
    /// Entropy in nats.
    pub value: f64,
    /// Series cut-off: terms k = 0..=truncation_k were summed.
    pub truncation_k: u64,
    /// Upper bound on the entropy contribution of the discarded tail.
    pub tail_bound: f64,
}

/// log of the Poisson pmf, with the lambda = 0 point mass handled exactly.
pub fn poisson_log_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)
}

/// Binary entropy -q ln q - (1-q) ln(1-q) with 0 ln 0 := 0.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange {
            what: "q",
            value: q,
            range: "[0, 1]",
        });
    }
    let mut h = 0.0;
    if q > 0.0 {
        h -= q * q.ln();
    }
    if q < 1.0 {
        h -= (1.0 - q) * (1.0 - q).ln();
    }
    Ok(h)
}

/// Psi(mu) = (mu+1) h_b(1/(mu+1)): the maximal entropy of a non-negative
/// integer random variable with mean at most mu.
pub fn psi(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::OutOfRange {
            what: "mu",
            value: mu,
            range: "[0, inf)",
        });
    }
    Ok((mu + 1.0) * binary_entropy(1.0 / (mu + 1.0))?)
}

/// Series cut-off: Poisson tails decay super-exponentially past
/// lambda + O(sqrt(lambda)), so this leaves Chernoff mass far below 1e-12.
fn truncation_k(lambda: f64) -> u64 {
    (lambda + 12.0 * (lambda + 1.0).sqrt() + 30.0).ceil() as u64
}

/// Chernoff bound on P(N_lambda > k) for k > lambda.
fn poisson_tail_mass(lambda: f64, k: u64) -> f64 {
    let kf = k as f64;
    (-lambda + kf * (1.0 + lambda.ln() - kf.ln())).exp()
}

/// Bound on sum_{k > K} -p_k ln p_k: -p ln p <= 2 sqrt(p) termwise, and
/// sqrt(p_k) shrinks at least geometrically with ratio sqrt(lambda/(K+1)).
fn tail_entropy_bound(lambda: f64, k: u64) -> f64 {
    let mass = poisson_tail_mass(lambda, k);
    let ratio = (lambda / (k as f64 + 1.0)).sqrt();
    2.0 * mass.sqrt() / (1.0 - ratio)
}

/// Entropy of a Poisson random variable with mean `lambda`, by truncated
/// series over k = 0..=K with K = ceil(lambda + 12 sqrt(lambda+1) + 30).
pub fn poisson_entropy(lambda: f64) -> Result<EntropyValue> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::OutOfRange {
            what: "lambda",
            value: lambda,
            range: "[0, inf)",
        });
    }
    if lambda == 0.0 {
        return Ok(EntropyValue {
            value: 0.0,
            truncation_k: 0,
            tail_bound: 0.0,
        });
    }
    let cap = truncation_k(lambda);
    let mut h = 0.0;
    for k in 0..=cap {
        let lp = poisson_log_pmf(k, lambda);
        let p = lp.exp();
        if p > 0.0 {
            h -= p * lp;
        }
    }
    Ok(EntropyValue {
        value: h.max(0.0),
        truncation_k: cap,
        tail_bound: tail_entropy_bound(lambda, cap),
    })
}

/// First derivative of the Poisson entropy: E[ln(N+1)] - ln(lambda).
pub fn poisson_entropy_deriv(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::OutOfRange {
            what: "lambda",
            value: lambda,
            range: "(0, inf)",
        });
    }
    let cap = truncation_k(lambda);
    let mut e_log = 0.0;
    for k in 0..=cap {
        let p = poisson_log_pmf(k, lambda).exp();
        e_log += p * ((k + 1) as f64).ln();
    }
    Ok(e_log - lambda.ln())
}

/// Second derivative of the Poisson entropy: E[ln(1 + 1/(N+1))] - 1/lambda.
pub fn poisson_entropy_second_deriv(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::OutOfRange {
            what: "lambda",
            value: lambda,
            range: "(0, inf)",
        });
    }
    let cap = truncation_k(lambda);
    let mut e_log = 0.0;
    for k in 0..=cap {
        let p = poisson_log_pmf(k, lambda).exp();
        e_log += p * (1.0 + 1.0 / (k + 1) as f64).ln();
    }
    Ok(e_log - 1.0 / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: recurrence-based pmf summation, no log-gamma path.
    fn oracle_entropy(lambda: f64, terms: u64) -> f64 {
        let mut p = (-lambda).exp();
        let mut h = 0.0;
        for k in 0..=terms {
            if p > 0.0 {
                h -= p * p.ln();
            }
            p *= lambda / (k + 1) as f64;
        }
        h
    }

    fn oracle_e_phi(lambda: f64, terms: u64, phi: impl Fn(u64) -> f64) -> f64 {
        let mut p = (-lambda).exp();
        let mut s = 0.0;
        for k in 0..=terms {
            s += p * phi(k);
            p *= lambda / (k + 1) as f64;
        }
        s
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            binary_entropy(0.5).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        // 0.25 ln 4 + 0.75 ln(4/3), frozen from a high-precision evaluation
        assert_relative_eq!(
            binary_entropy(0.25).unwrap(),
            0.5623351446188083,
            max_relative = 1e-12
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_relative_eq!(psi(1.0).unwrap(), 2.0 * std::f64::consts::LN_2, max_relative = 1e-14);
        // ln 4 + 3 ln(4/3)
        assert_relative_eq!(psi(3.0).unwrap(), 2.2493405784752334, max_relative = 1e-12);
        assert!(psi(-1e-9).is_err());
    }

    #[test]
    fn poisson_entropy_point_mass() {
        let e = poisson_entropy(0.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.tail_bound, 0.0);
        assert!(poisson_entropy(-1.0).is_err());
    }

    #[test]
    fn poisson_entropy_matches_series_oracle() {
        // Frozen from the K=50 truncated-series oracle.
        let e = poisson_entropy(1.0).unwrap();
        assert_relative_eq!(e.value, 1.3048422422562515, max_relative = 1e-10);
        assert_relative_eq!(e.value, oracle_entropy(1.0, 50), max_relative = 1e-12);
        assert!(e.tail_bound <= 1e-12);

        let e = poisson_entropy(100.0).unwrap();
        assert_relative_eq!(e.value, oracle_entropy(100.0, 400), max_relative = 1e-10);
        assert!(e.tail_bound <= 1e-12);
        // Sanity band against 0.5 ln(2 pi e lambda) - 1/(12 lambda); the
        // dropped lambda^-2 term is ~4.2e-6, so the band is 1e-5, not tighter.
        let band = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * 100.0).ln()
            - 1.0 / 1200.0;
        assert!((e.value - band).abs() < 1e-5);
    }

    #[test]
    fn tail_bound_recorded_and_small() {
        for lambda in [0.01, 0.5, 3.0, 42.0, 1000.0, 1e4] {
            let e = poisson_entropy(lambda).unwrap();
            assert!(e.tail_bound <= 1e-12, "lambda={lambda}: {}", e.tail_bound);
            assert!(e.truncation_k as f64 > lambda);
        }
    }

    #[test]
    fn deriv_matches_forward_difference_identity() {
        // E[ln(N+1)] - ln 1, frozen from the series oracle.
        let d = poisson_entropy_deriv(1.0).unwrap();
        assert_relative_eq!(d, 0.5734028091226202, max_relative = 1e-10);
        assert_relative_eq!(
            d,
            oracle_e_phi(1.0, 60, |k| ((k + 1) as f64).ln()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn deriv_band() {
        // 0 < H'(lambda) <= ln(1 + 1/lambda)
        for lambda in [0.1, 1.0, 10.0, 1e4] {
            let d = poisson_entropy_deriv(lambda).unwrap();
            assert!(d > 0.0, "lambda={lambda}");
            assert!(d <= (1.0 + 1.0 / lambda).ln() + 1e-9, "lambda={lambda}");
        }
        assert!(poisson_entropy_deriv(0.0).is_err());
    }

    #[test]
    fn second_deriv_strict_concavity_bound() {
        // Frozen series value at lambda = 1; bound is -e^-lambda / lambda.
        let d2 = poisson_entropy_second_deriv(1.0).unwrap();
        assert_relative_eq!(d2, -0.5259001639772826, max_relative = 1e-10);
        for lambda in [0.1, 0.5, 1.0, 5.0, 20.0] {
            let d2 = poisson_entropy_second_deriv(lambda).unwrap();
            assert!(
                d2 <= -(-lambda).exp() / lambda + 1e-12,
                "lambda={lambda}: {d2}"
            );
        }
        assert_relative_eq!(
            poisson_entropy_second_deriv(0.5).unwrap(),
            oracle_e_phi(0.5, 60, |k| (1.0 + 1.0 / (k + 1) as f64).ln()) - 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn second_deriv_matches_finite_differences() {
        let delta = 1e-4;
        for lambda in [0.5, 1.0, 5.0, 20.0] {
            let d2 = poisson_entropy_second_deriv(lambda).unwrap();
            let fd = (poisson_entropy(lambda + delta).unwrap().value
                - 2.0 * poisson_entropy(lambda).unwrap().value
                + poisson_entropy(lambda - delta).unwrap().value)
                / (delta * delta);
            assert!((d2 - fd).abs() < 1e-4, "lambda={lambda}: {d2} vs {fd}");
        }
    }

    #[test]
    fn entropy_is_increasing_on_grid() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let lambda = i as f64 * 0.5;
            let h = poisson_entropy(lambda).unwrap().value;
            assert!(h > prev, "lambda={lambda}");
            prev = h;
        }
    }

    /// Max-entropy distribution on {0..cap} with mean <= mu is the tilted
    /// geometric p_k proportional to q^k; binary-search q to pin the mean.
    fn max_entropy_mean_constrained(mu: f64, cap: u64) -> f64 {
        let stats = |q: f64| -> (f64, f64) {
            let weights: Vec<f64> = (0..=cap).map(|k| q.powi(k as i32)).collect();
            let z: f64 = weights.iter().sum();
            let mean = weights
                .iter()
                .enumerate()
                .map(|(k, w)| k as f64 * w / z)
                .sum::<f64>();
            let h = weights
                .iter()
                .map(|w| {
                    let p = w / z;
                    if p > 0.0 {
                        -p * p.ln()
                    } else {
                        0.0
                    }
                })
                .sum::<f64>();
            (mean, h)
        };
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if stats(mid).0 < mu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        stats(0.5 * (lo + hi)).1
    }

    #[test]
    fn psi_dominates_mean_constrained_entropy() {
        for mu in [0.5, 1.0, 2.0] {
            let h_star = max_entropy_mean_constrained(mu, 20);
            assert!(
                h_star <= psi(mu).unwrap() + 1e-9,
                "mu={mu}: {h_star} vs {}",
                psi(mu).unwrap()
            );
        }
        // And a seeded sweep of arbitrary pmfs with mean <= mu.
        use rand::Rng;
        let mut rng = crate::rng::derive_rng(2024, crate::rng::stream::PROBE, 0);
        for mu in [0.5_f64, 1.0, 2.0] {
            for _ in 0..200 {
                let raw: Vec<f64> = (0..=20).map(|_| rng.random::<f64>()).collect();
                let z: f64 = raw.iter().sum();
                let pmf: Vec<f64> = raw.iter().map(|w| w / z).collect();
                let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
                if mean > mu {
                    continue;
                }
                let h: f64 = pmf.iter().map(|p| -p * p.ln()).sum();
                assert!(h <= psi(mu).unwrap() + 1e-9);
            }
        }
    }
}
