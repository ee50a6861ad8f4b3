//! Desk-scale random-coding experiment: random or fixed codebooks through
//! the multinomial channel, maximum-likelihood or threshold decoding.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::bounds::{achievability_bound, BoundReport, Conditioning};
use crate::channel::{sample_multinomial, ChannelConfig, HistogramMode, OutputHistogram};
use crate::channel::CountVector;
use crate::error::{Error, Result};
use crate::infodensity::{info_density, EnumeratedMarginal, InputPrior};
use crate::kernel::TransitionKernel;
use crate::rng::{self, derive_rng, sub_rng};

/// Default feasibility caps for exact conditional likelihoods.
const MAX_N: usize = 16;
const MAX_S: usize = 8;
/// Rejection sampling stalls below this acceptance rate.
const MIN_ACCEPT_RATE: f64 = 1e-4;

#[derive(Debug, Clone)]
pub enum CodebookSpec {
    /// M codewords drawn iid from the prior each trial.
    RandomIid { m: usize },
    /// M codewords drawn iid and conditioned on the constraint set F_n by
    /// rejection.
    RandomConstrained { m: usize },
    /// A fixed codebook reused across trials.
    Fixed(Vec<Vec<u64>>),
}

impl CodebookSpec {
    pub fn size(&self) -> usize {
        match self {
            CodebookSpec::RandomIid { m } | CodebookSpec::RandomConstrained { m } => *m,
            CodebookSpec::Fixed(words) => words.len(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Decoder {
    MaxLikelihood,
    /// Feinstein-style: decode to the first codeword whose information
    /// density with the output exceeds ln(gamma).
    Threshold { ln_gamma: f64 },
}

#[derive(Debug, Clone)]
pub struct CodingExperimentSpec {
    pub codebook: CodebookSpec,
    pub cfg: ChannelConfig,
    pub kernel: TransitionKernel,
    pub prior: InputPrior,
    pub decoder: Decoder,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub empirical_error: f64,
    pub wilson95_low: f64,
    pub wilson95_high: f64,
    /// (ln M) / n.
    pub rate_nats_per_type: f64,
    /// Fraction of drawn codewords landing in F_n.
    pub constraint_hit_rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub seed: u64,
    pub bound_report: Option<BoundReport>,
}

/// 95% Wilson interval for a binomial proportion.
pub fn wilson95(successes: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

/// Pool sampling probabilities of an arbitrary count vector: x W / |x|.
/// Coincides with `output_probs` exactly on the constraint set.
fn pool_probs(x: &[u64], kernel: &TransitionKernel) -> Vec<f64> {
    let total: u64 = x.iter().sum();
    let mut p = vec![0.0; kernel.cols()];
    if total == 0 {
        return p;
    }
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (j, w) in kernel.row(i).iter().enumerate() {
            p[j] += xi as f64 * w;
        }
    }
    for v in &mut p {
        *v /= total as f64;
    }
    p
}

/// Multinomial log-likelihood of y under candidate probabilities, up to the
/// shared combinatorial constant.
fn log_likelihood(y: &[u64], p: &[f64]) -> f64 {
    let mut ll = 0.0;
    for (&yj, &pj) in y.iter().zip(p) {
        if yj == 0 {
            continue;
        }
        if pj <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += yj as f64 * pj.ln();
    }
    ll
}

fn draw_codebook(
    spec: &CodebookSpec,
    prior: &InputPrior,
    cfg: &ChannelConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Vec<u64>>, u64, u64)> {
    match spec {
        CodebookSpec::Fixed(words) => {
            let hits = words
                .iter()
                .filter(|w| w.iter().sum::<u64>() == cfg.total_items())
                .count() as u64;
            Ok((words.clone(), words.len() as u64, hits))
        }
        CodebookSpec::RandomIid { m } => {
            let mut words = Vec::with_capacity(*m);
            let mut hits = 0;
            for _ in 0..*m {
                let w: Vec<u64> = (0..cfg.n).map(|_| prior.sample(rng)).collect();
                if w.iter().sum::<u64>() == cfg.total_items() {
                    hits += 1;
                }
                words.push(w);
            }
            Ok((words, *m as u64, hits))
        }
        CodebookSpec::RandomConstrained { m } => {
            let mut words = Vec::with_capacity(*m);
            let mut attempts = 0u64;
            while words.len() < *m {
                let w: Vec<u64> = (0..cfg.n).map(|_| prior.sample(rng)).collect();
                attempts += 1;
                if w.iter().sum::<u64>() == cfg.total_items() {
                    words.push(w);
                }
                if attempts >= 100_000 && (words.len() as f64) < MIN_ACCEPT_RATE * attempts as f64 {
                    return Err(Error::RejectionStall {
                        min_rate: MIN_ACCEPT_RATE,
                    });
                }
            }
            let accepted = words.len() as u64;
            Ok((words, attempts, accepted))
        }
    }
}

/// Runs the experiment: per trial, draw (or reuse) the codebook, pick a
/// uniform message, push it through the multinomial channel, decode, and
/// count errors. Decoder ties break uniformly from the seeded stream.
pub fn random_coding_experiment(
    spec: &CodingExperimentSpec,
    marginal: Option<&EnumeratedMarginal>,
) -> Result<ExperimentResult> {
    let m_size = spec.codebook.size();
    if m_size < 2 {
        return Err(Error::InvalidParams("codebook needs M >= 2".into()));
    }
    if spec.trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    if spec.cfg.n > MAX_N || spec.prior.s_n() > MAX_S {
        return Err(Error::StateSpaceTooLarge {
            states: (spec.cfg.n as u128) * (spec.prior.s_n() as u128),
            cap: (MAX_N * MAX_S) as u64,
        });
    }
    if matches!(spec.decoder, Decoder::Threshold { .. }) && marginal.is_none() {
        return Err(Error::InvalidParams(
            "threshold decoding needs an enumerated marginal".into(),
        ));
    }
    if let CodebookSpec::Fixed(words) = &spec.codebook {
        if let Some(w) = words.iter().find(|w| w.len() != spec.cfg.n) {
            return Err(Error::DimensionMismatch(format!(
                "fixed codeword has {} types, config has {}",
                w.len(),
                spec.cfg.n
            )));
        }
    }

    let total_samples = spec.cfg.total_samples();
    let partials = rng::run_trials(spec.trials, |range| -> Result<(u64, u64, u64)> {
        let mut errors = 0u64;
        let mut drawn = 0u64;
        let mut hits = 0u64;
        for t in range {
            let trial_rng = derive_rng(spec.seed, rng::stream::CODING, t);
            let mut book_rng = sub_rng(&trial_rng, 0);
            let (book, d, h) = draw_codebook(&spec.codebook, &spec.prior, &spec.cfg, &mut book_rng)?;
            drawn += d;
            hits += h;

            let mut msg_rng = sub_rng(&trial_rng, 1);
            let msg = msg_rng.random_range(0..book.len());
            let channel_rng = sub_rng(&trial_rng, 2);
            let y = sample_multinomial(&pool_probs(&book[msg], &spec.kernel), total_samples, &channel_rng)?;

            let decoded = match spec.decoder {
                Decoder::MaxLikelihood => {
                    let mut best = f64::NEG_INFINITY;
                    let mut ties: Vec<usize> = Vec::new();
                    for (c, word) in book.iter().enumerate() {
                        let ll = log_likelihood(&y.counts, &pool_probs(word, &spec.kernel));
                        if ll > best {
                            best = ll;
                            ties.clear();
                            ties.push(c);
                        } else if ll == best {
                            ties.push(c);
                        }
                    }
                    let mut tie_rng = sub_rng(&trial_rng, 3);
                    ties[tie_rng.random_range(0..ties.len())]
                }
                Decoder::Threshold { ln_gamma } => {
                    let marg = marginal.expect("checked above");
                    let z = OutputHistogram {
                        counts: y.counts.clone(),
                        mode: HistogramMode::Poissonized,
                    };
                    let mut choice = usize::MAX;
                    for (c, word) in book.iter().enumerate() {
                        let i = info_density(
                            &CountVector(word.clone()),
                            &z,
                            marg,
                            &spec.kernel,
                            &spec.cfg,
                        )?;
                        if i > ln_gamma {
                            choice = c;
                            break;
                        }
                    }
                    choice
                }
            };
            if decoded != msg {
                errors += 1;
            }
        }
        Ok((errors, drawn, hits))
    });

    let mut errors = 0u64;
    let mut drawn = 0u64;
    let mut hits = 0u64;
    for p in partials {
        let (e, d, h) = p?;
        errors += e;
        drawn += d;
        hits += h;
    }
    let empirical_error = errors as f64 / spec.trials as f64;
    let (lo, hi) = wilson95(errors, spec.trials);

    // achievability report against the kernel's own achieved conditioning,
    // skipped when the kernel cannot satisfy Def. 1 at all (zero column)
    let bound_report = spec
        .kernel
        .well_conditioned_report(1.0, 0.0, 1.0)
        .ok()
        .and_then(|rep| {
            achievability_bound(
                &spec.cfg,
                &spec.kernel,
                Conditioning {
                    tau: rep.tau_achieved.min(1.0),
                    eta: if rep.eta_achieved.is_finite() { rep.eta_achieved } else { 0.0 },
                    c_max: rep.cmax_achieved,
                },
            )
            .ok()
        });

    Ok(ExperimentResult {
        empirical_error,
        wilson95_low: lo,
        wilson95_high: hi,
        rate_nats_per_type: (m_size as f64).ln() / spec.cfg.n as f64,
        constraint_hit_rate: if drawn > 0 { hits as f64 / drawn as f64 } else { 0.0 },
        errors,
        trials: spec.trials,
        seed: spec.seed,
        bound_report,
    })
}
