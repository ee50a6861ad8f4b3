//! The frequency-based channel: count-vector inputs, mixed output
//! probabilities, multinomial sampling, and the Poissonized surrogate.

use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::entropy::poisson_entropy;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::rng::coord_rng;

/// Scaling parameters of one channel instance. `n * g` is the total object
/// count and `n * r` the number of samples drawn; both must round to positive
/// integers within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub n: usize,
    pub m: usize,
    pub g: f64,
    pub r: f64,
}

impl ChannelConfig {
    pub fn new(n: usize, m: usize, g: f64, r: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParams("n and m must be >= 1".into()));
        }
        if g.is_nan() || g <= 0.0 || r.is_nan() || r <= 0.0 {
            return Err(Error::InvalidParams(format!("g and r must be positive; got ({g}, {r})")));
        }
        for (label, v) in [("n*g", n as f64 * g), ("n*r", n as f64 * r)] {
            if (v - v.round()).abs() > 1e-9 || v.round() < 1.0 {
                return Err(Error::InvalidParams(format!(
                    "{label} = {v} must round to a positive integer within 1e-9"
                )));
            }
        }
        Ok(Self { n, m, g, r })
    }

    /// Total object count n*g.
    pub fn total_items(&self) -> u64 {
        (self.n as f64 * self.g).round() as u64
    }

    /// Total sample count n*r.
    pub fn total_samples(&self) -> u64 {
        (self.n as f64 * self.r).round() as u64
    }

    /// Sampling-to-abundance ratio r/g.
    pub fn ratio(&self) -> f64 {
        self.r / self.g
    }
}

/// Input count vector x, one count per object type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountVector(pub Vec<u64>);

impl CountVector {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Membership in the constraint set F_n: the total equals n*g exactly.
    pub fn satisfies_constraint(&self, cfg: &ChannelConfig) -> bool {
        self.total() == cfg.total_items()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramMode {
    Multinomial,
    Poissonized,
}

/// Output count histogram. Multinomial histograms sum to n*r exactly;
/// Poissonized ones carry no sum constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputHistogram {
    pub counts: Vec<u64>,
    pub mode: HistogramMode,
}

impl OutputHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Poisson intensities lambda_j = (r/g) sum_i x_i W[i][j].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityVector(pub Vec<f64>);

fn check_dims(x_len: usize, kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<()> {
    if x_len != kernel.rows() || kernel.rows() != cfg.n || kernel.cols() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "x has {x_len} types, kernel is {}x{}, config is ({}, {})",
            kernel.rows(),
            kernel.cols(),
            cfg.n,
            cfg.m
        )));
    }
    Ok(())
}

/// Mixed output probabilities p_j = (1/(n g)) sum_i x_i W[i][j] for a
/// constraint-satisfying input.
pub fn output_probs(x: &CountVector, kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<Vec<f64>> {
    check_dims(x.0.len(), kernel, cfg)?;
    if !x.satisfies_constraint(cfg) {
        return Err(Error::ConstraintViolated {
            got: x.total(),
            want: cfg.total_items(),
        });
    }
    Ok(mix_columns(&x.0, kernel, 1.0 / cfg.total_items() as f64))
}

/// Column mixing sum_i x_i W[i][j], scaled.
fn mix_columns(x: &[u64], kernel: &TransitionKernel, scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; kernel.cols()];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let xi = xi as f64;
        for (j, w) in kernel.row(i).iter().enumerate() {
            out[j] += xi * w;
        }
    }
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// One multinomial draw of `total` samples via sequential binomial
/// conditioning. Coordinate j consumes the j-th counter stream of
/// `trial_rng`, so the draw is reproducible.
pub fn sample_multinomial(p: &[f64], total: u64, trial_rng: &ChaCha12Rng) -> Result<OutputHistogram> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilityVector("empty".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilityVector(format!("sums to {sum}")));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidProbabilityVector(format!("entry {bad}")));
    }
    let m = p.len();
    let mut counts = vec![0u64; m];
    let mut remaining = total;
    let mut rem_p = 1.0_f64;
    for j in 0..m - 1 {
        if remaining == 0 {
            break;
        }
        let q = if rem_p > 0.0 { (p[j] / rem_p).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            let mut rng = coord_rng(trial_rng, j as u64);
            rand_distr::Binomial::new(remaining, q)
                .expect("q within (0,1)")
                .sample(&mut rng)
        };
        counts[j] = draw;
        remaining -= draw;
        rem_p = (rem_p - p[j]).max(0.0);
    }
    counts[m - 1] = remaining;
    Ok(OutputHistogram {
        counts,
        mode: HistogramMode::Multinomial,
    })
}

/// Poisson intensities of the surrogate channel. The input need not satisfy
/// the total constraint; the Poissonized channel is defined on the whole
/// support box.
pub fn poisson_intensities(x: &CountVector, kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<IntensityVector> {
    check_dims(x.0.len(), kernel, cfg)?;
    Ok(IntensityVector(mix_columns(&x.0, kernel, cfg.ratio())))
}

/// Real-valued intensities, used by the gradient and convexity probes.
pub fn poisson_intensities_real(x: &[f64], kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<Vec<f64>> {
    check_dims(x.len(), kernel, cfg)?;
    let mut out = vec![0.0; kernel.cols()];
    for (i, &xi) in x.iter().enumerate() {
        for (j, w) in kernel.row(i).iter().enumerate() {
            out[j] += xi * w;
        }
    }
    for v in &mut out {
        *v *= cfg.ratio();
    }
    Ok(out)
}

/// Independent Poisson draws per coordinate, one counter stream each.
pub fn sample_poissonized(lambda: &IntensityVector, trial_rng: &ChaCha12Rng) -> OutputHistogram {
    let counts = lambda
        .0
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            if l <= 0.0 {
                0
            } else {
                let mut rng = coord_rng(trial_rng, j as u64);
                rand_distr::Poisson::new(l).expect("lambda > 0").sample(&mut rng) as u64
            }
        })
        .collect();
    OutputHistogram {
        counts,
        mode: HistogramMode::Poissonized,
    }
}

/// Conditional entropy h(x) = sum_j H_Poiss(lambda_j(x)) of the Poissonized
/// channel given the input x.
pub fn conditional_entropy_h(x: &CountVector, kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<f64> {
    let lambda = poisson_intensities(x, kernel, cfg)?;
    lambda.0.iter().map(|&l| Ok(poisson_entropy(l)?.value)).sum()
}

/// Same as [`conditional_entropy_h`] on a real-valued input point.
pub fn conditional_entropy_h_real(x: &[f64], kernel: &TransitionKernel, cfg: &ChannelConfig) -> Result<f64> {
    let lambda = poisson_intensities_real(x, kernel, cfg)?;
    lambda.iter().map(|&l| Ok(poisson_entropy(l)?.value)).sum()
}
