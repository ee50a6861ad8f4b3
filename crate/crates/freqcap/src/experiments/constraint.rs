//! Monte Carlo mass of the constraint set F_n = {x : sum x_i = n g}.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::infodensity::InputPrior;
use crate::rng::{self, derive_rng, sub_rng};

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintMassReport {
    pub estimate: f64,
    pub std_error: f64,
    pub wilson95_low: f64,
    pub wilson95_high: f64,
    /// Reference threshold 1/(3 n g) the mass is compared against.
    pub threshold: f64,
    pub meets_threshold: bool,
    pub prior_mean: f64,
    /// Prior mean within 5% of g; when false the mass is expected to be
    /// exponentially small and the threshold comparison is moot.
    pub mean_matches_g: bool,
    pub target_total: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Estimates P(sum_i X_i = n g) for X iid from the prior.
pub fn constraint_set_probability(
    prior: &InputPrior,
    n: usize,
    g: f64,
    trials: u64,
    seed: u64,
) -> Result<ConstraintMassReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParams("need n >= 1 and trials >= 1".into()));
    }
    let target = n as f64 * g;
    if g.is_nan() || g <= 0.0 || (target - target.round()).abs() > 1e-9 || target.round() < 1.0 {
        return Err(Error::InfeasibleTarget { target });
    }
    let target = target.round() as u64;

    let partials = rng::run_trials(trials, |range| {
        let mut hits = 0u64;
        for t in range {
            let trial_rng = derive_rng(seed, rng::stream::CONSTRAINT, t);
            let mut rng = sub_rng(&trial_rng, 0);
            let total: u64 = (0..n).map(|_| prior.sample(&mut rng)).sum();
            if total == target {
                hits += 1;
            }
        }
        hits
    });
    let hits: u64 = partials.into_iter().sum();
    let estimate = hits as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    let (lo, hi) = super::coding::wilson95(hits, trials);
    let threshold = 1.0 / (3.0 * n as f64 * g);
    let prior_mean = prior.mean();
    Ok(ConstraintMassReport {
        estimate,
        std_error,
        wilson95_low: lo,
        wilson95_high: hi,
        threshold,
        meets_threshold: estimate >= threshold,
        prior_mean,
        mean_matches_g: (prior_mean - g).abs() <= 0.05 * g,
        target_total: target,
        trials,
        seed,
    })
}
