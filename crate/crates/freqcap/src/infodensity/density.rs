//! Information density of the Poissonized channel and its Lipschitz
//! semi-norm, brute-forced over a truncated output box.

use rand_distr::Distribution;
use serde::Serialize;

use crate::channel::{poisson_intensities, ChannelConfig, CountVector, OutputHistogram};
use crate::entropy::poisson_log_pmf;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::rng::{self, coord_rng, derive_rng};

use super::marginal::EnumeratedMarginal;
use super::prior::InputPrior;

/// i(x; z) = ln P(z|x) - ln P_Z(z), with P(z|x) the product of Poisson pmfs
/// at the intensities of x and P_Z taken from the enumerated marginal.
pub fn info_density(
    x: &CountVector,
    z: &OutputHistogram,
    marginal: &EnumeratedMarginal,
    kernel: &TransitionKernel,
    cfg: &ChannelConfig,
) -> Result<f64> {
    if z.counts.len() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "output has {} coordinates, config has {}",
            z.counts.len(),
            cfg.m
        )));
    }
    let lambda = poisson_intensities(x, kernel, cfg)?;
    let mut lp_cond = 0.0;
    for (j, &zj) in z.counts.iter().enumerate() {
        lp_cond += poisson_log_pmf(zj, lambda.0[j]);
    }
    Ok(lp_cond - marginal.log_joint(&z.counts)?)
}

/// Brute-forced Lipschitz semi-norm of f_x(z) = i(x; z): the largest
/// one-step discrete derivative |f(z + e_j) - f(z)| over the box
/// {0..cap}^m. f is additive across coordinates, so the scan is exact
/// per coordinate rather than over the full box.
pub fn lipschitz_seminorm_bruteforce(
    x: &CountVector,
    marginal: &EnumeratedMarginal,
    kernel: &TransitionKernel,
    cfg: &ChannelConfig,
    z_box_cap: usize,
) -> Result<f64> {
    if z_box_cap + 1 > marginal.z_cap() {
        return Err(Error::TruncationExceeded {
            value: z_box_cap as u64 + 1,
            cap: marginal.z_cap(),
        });
    }
    let states = (cfg.m as u128) * (z_box_cap as u128 + 1);
    if states > 1_000_000 {
        return Err(Error::StateSpaceTooLarge {
            states,
            cap: 1_000_000,
        });
    }
    let lambda = poisson_intensities(x, kernel, cfg)?;
    let mut sup = 0.0_f64;
    for j in 0..cfg.m {
        let l = lambda.0[j];
        if l == 0.0 {
            // coordinate j is deterministically zero given x; no step inside
            // the support exists
            continue;
        }
        for z in 0..=z_box_cap as u64 {
            let cond_step = poisson_log_pmf(z + 1, l) - poisson_log_pmf(z, l);
            let marg_step = marginal.log_marginal(j, z + 1)? - marginal.log_marginal(j, z)?;
            let d = cond_step - marg_step;
            if d.is_finite() {
                sup = sup.max(d.abs());
            }
        }
    }
    Ok(sup)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Monte Carlo mutual-information estimate: the sample mean of the
/// information density over (X, Z) draws from the joint law. On tiny
/// instances with a full-joint marginal this is an unbiased estimate of the
/// exact enumerated mutual information.
pub fn mc_mutual_information(
    prior: &InputPrior,
    kernel: &TransitionKernel,
    cfg: &ChannelConfig,
    marginal: &EnumeratedMarginal,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    let partials = rng::run_trials(trials, |range| -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in range {
            let trial_rng = derive_rng(seed, rng::stream::MUTUAL_INFO, t);
            let mut x_rng = coord_rng(&trial_rng, 1_000_000);
            let x = CountVector((0..cfg.n).map(|_| prior.sample(&mut x_rng)).collect());
            let lambda = poisson_intensities(&x, kernel, cfg)?;
            let counts: Vec<u64> = lambda
                .0
                .iter()
                .enumerate()
                .map(|(j, &l)| {
                    if l <= 0.0 {
                        0
                    } else {
                        let mut zr = coord_rng(&trial_rng, j as u64);
                        rand_distr::Poisson::new(l).expect("lambda > 0").sample(&mut zr) as u64
                    }
                })
                .collect();
            // evaluated through the unbounded marginal so a rare draw past
            // the table cap cannot abort a long run
            let mut lp_cond = 0.0;
            for (j, &zj) in counts.iter().enumerate() {
                lp_cond += poisson_log_pmf(zj, lambda.0[j]);
            }
            let i = lp_cond - marginal.log_joint_unbounded(&counts);
            sum += i;
            sum_sq += i * i;
        }
        Ok((sum, sum_sq))
    });
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sum_sq += q;
    }
    let mean = sum / trials as f64;
    let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / trials as f64).sqrt(),
        trials,
        seed,
    })
}
