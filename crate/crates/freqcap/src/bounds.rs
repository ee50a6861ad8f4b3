//! Converse and achievability capacity bounds, the DNA corollary, effective
//! support, and the Feinstein error-probability expression.
//!
//! Converse:      0.5 ln(r ^ e g)
//! Achievability: 0.5 ln r - Psi(r/g) + log det(W W^T)/(2n)
//!
//! Both drop the paper's o_n(1) terms; every report carries
//! `asymptotic_terms_omitted: true` to say so.

use serde::Serialize;

use crate::channel::ChannelConfig;
use crate::entropy::psi;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;

/// Well-conditioning parameters (tau, eta, C_max) a kernel is checked against.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Conditioning {
    pub tau: f64,
    pub eta: f64,
    pub c_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub converse: f64,
    pub achievability: f64,
    pub penalty_delta: f64,
    pub psi_term: f64,
    pub half_log_r: f64,
    pub params_echo: ChannelConfig,
    pub asymptotic_terms_omitted: bool,
    /// The achievability expression is meaningful only asymptotically; at
    /// small n it can go negative and is returned unclamped.
    pub negative_achievability: bool,
}

/// Converse bound 0.5 ln(min(r, e g)) in nats per type. Unclamped: r -> 0
/// sends it to -inf by design.
pub fn converse_bound(cfg: &ChannelConfig) -> f64 {
    0.5 * cfg.r.min(std::f64::consts::E * cfg.g).ln()
}

/// Achievability bound for a kernel that passes well-conditioning at the
/// supplied parameters.
pub fn achievability_bound(
    cfg: &ChannelConfig,
    kernel: &TransitionKernel,
    conditioning: Conditioning,
) -> Result<BoundReport> {
    let report = kernel.well_conditioned_report(conditioning.tau, conditioning.eta, conditioning.c_max)?;
    if !report.passes {
        return Err(Error::NotWellConditioned(format!(
            "achieved (tau, eta, cmax) = ({}, {}, {}) vs required ({}, {}, {})",
            report.tau_achieved,
            report.eta_achieved,
            report.cmax_achieved,
            conditioning.tau,
            conditioning.eta,
            conditioning.c_max
        )));
    }
    if kernel.cols() < kernel.rows() {
        return Err(Error::DimensionMismatch(format!(
            "achievability bound needs m >= n, kernel is {}x{}",
            kernel.rows(),
            kernel.cols()
        )));
    }
    let penalty_delta = kernel.det_penalty()?;
    let half_log_r = 0.5 * cfg.r.ln();
    let psi_term = psi(cfg.ratio())?;
    let achievability = half_log_r - psi_term + penalty_delta;
    Ok(BoundReport {
        converse: converse_bound(cfg),
        achievability,
        penalty_delta,
        psi_term,
        half_log_r,
        params_echo: *cfg,
        asymptotic_terms_omitted: true,
        negative_achievability: achievability < 0.0,
    })
}

/// DNA short-molecule parameters: K molecules of length L = beta ln K over
/// an alphabet of size |A|, read N times. Derived: n = |A|^L types and
/// g = K / n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DnaParams {
    pub k: f64,
    pub beta: f64,
    pub alphabet_size: usize,
    pub reads: f64,
    pub l: f64,
    pub n: f64,
    pub g: f64,
}

impl DnaParams {
    pub fn new(k: f64, beta: f64, alphabet_size: usize, reads: f64) -> Result<Self> {
        if k.is_nan() || k <= 1.0 || reads.is_nan() || reads <= 0.0 || beta.is_nan() || beta <= 0.0 || alphabet_size < 2 {
            return Err(Error::InvalidParams(format!(
                "DNA params need K > 1, reads > 0, beta > 0, |A| >= 2; got ({k}, {reads}, {beta}, {alphabet_size})"
            )));
        }
        let l = beta * k.ln();
        let n = (alphabet_size as f64).powf(l);
        Ok(Self {
            k,
            beta,
            alphabet_size,
            reads,
            l,
            n,
            g: k / n,
        })
    }

    /// Corollary regime (2/(3 ln|A|), 1/ln|A|).
    pub fn regime(&self) -> (f64, f64) {
        let la = (self.alphabet_size as f64).ln();
        (2.0 / (3.0 * la), 1.0 / la)
    }

    pub fn in_regime(&self) -> bool {
        let (lo, hi) = self.regime();
        self.beta > lo && self.beta < hi
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DnaRateReport {
    /// Normalized rate lower bound from the corollary expression.
    pub rate: f64,
    /// Delta = (1/(2|A|)) log det(w w^T) of the single-nucleotide kernel.
    pub delta: f64,
    pub first_term: f64,
    pub psi_term: f64,
    pub params: DnaParams,
    pub beta_in_regime: bool,
    pub asymptotic_terms_omitted: bool,
}

/// Corollary rate bound
/// (1/(2 beta)) ln N / ln K - Psi(N / K^(1 - beta ln|A|)) / (beta ln K) + Delta.
///
/// `strict` turns a beta outside the regime into a hard error instead of a
/// report flag.
pub fn dna_rate_bound(dna: &DnaParams, nucleotide_kernel: &TransitionKernel, strict: bool) -> Result<DnaRateReport> {
    if nucleotide_kernel.rows() != dna.alphabet_size {
        return Err(Error::DimensionMismatch(format!(
            "nucleotide kernel has {} rows, alphabet size is {}",
            nucleotide_kernel.rows(),
            dna.alphabet_size
        )));
    }
    let in_regime = dna.in_regime();
    if strict && !in_regime {
        let (lo, hi) = dna.regime();
        return Err(Error::RegimeViolation {
            beta: dna.beta,
            lo,
            hi,
        });
    }
    // every column of w must carry mass for the conditioning to be satisfiable
    for j in 0..nucleotide_kernel.cols() {
        nucleotide_kernel.condition_number(j)?;
    }
    let a = dna.alphabet_size as f64;
    let delta = nucleotide_kernel.kron_det_shortcut(1)? / (2.0 * a);
    let ln_k = dna.k.ln();
    let first_term = dna.reads.ln() / (2.0 * dna.beta * ln_k);
    let psi_arg = dna.reads / dna.k.powf(1.0 - dna.beta * a.ln());
    let psi_term = psi(psi_arg)? / (dna.beta * ln_k);
    Ok(DnaRateReport {
        rate: first_term - psi_term + delta,
        delta,
        first_term,
        psi_term,
        params: *dna,
        beta_in_regime: in_regime,
        asymptotic_terms_omitted: true,
    })
}

/// Effective support s_n* = s_n max_j sum_i W[i][j]: the support cap after
/// column mixing, which bounds the Poisson intensities.
pub fn effective_support(s_n: f64, kernel: &TransitionKernel) -> f64 {
    let max_col = kernel.col_sums().iter().cloned().fold(0.0_f64, f64::max);
    s_n * max_col
}

/// Parameters of the adapted Feinstein bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeinsteinParams {
    /// Feinstein slack delta_n.
    pub delta_n: f64,
    /// Input support cap s_n.
    pub s_n: f64,
    /// Conditioning parameters of the kernel.
    pub tau: f64,
    pub c_max: f64,
    pub eta: f64,
    /// Talagrand constant c (the paper leaves it unspecified).
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeinsteinReport {
    pub epsilon_bound: f64,
    /// Entropy-concentration exponent branch c eta / ((r/g)^2 s^2 ln^2 n).
    pub entropy_branch: f64,
    /// Info-density concentration branch g / (19 C_max r s (ln s - ln tau)^2).
    pub info_density_branch: f64,
    pub active_branch: &'static str,
    /// Default code-size choice ln M = n I - 3 n delta - 0.5 ln(6 pi n r),
    /// evaluated with the mutual-information lower bound when a kernel small
    /// enough to factor is supplied.
    pub log_m_default: Option<f64>,
    pub vacuous: bool,
}

/// Largest kernel the log_m echo will factor; the epsilon bound itself never
/// touches the kernel.
const LOG_M_KERNEL_CAP: usize = 2048;

/// Right-hand side of the adapted Feinstein proposition:
/// (11 / mass_F) [ sqrt(n r) exp(-n delta^2 (branch_min)) + exp(-n delta) ].
///
/// The conditioning parameters enter through `fp`; the kernel is only
/// consulted for the default code-size echo.
pub fn feinstein_epsilon_bound(
    fp: &FeinsteinParams,
    cfg: &ChannelConfig,
    kernel: Option<&TransitionKernel>,
    mass_f: f64,
) -> Result<FeinsteinReport> {
    if mass_f.is_nan() || mass_f <= 0.0 || mass_f > 1.0 {
        return Err(Error::InvalidParams(format!("mass_F must be in (0, 1]; got {mass_f}")));
    }
    if fp.s_n.is_nan()
        || fp.s_n < 1.0
        || fp.tau.is_nan()
        || fp.tau <= 0.0
        || fp.tau > 1.0
        || fp.c_max.is_nan()
        || fp.c_max <= 0.0
        || fp.eta < 0.0
        || fp.c.is_nan()
        || fp.c <= 0.0
    {
        return Err(Error::InvalidParams(
            "Feinstein params need s_n >= 1, tau in (0,1], C_max > 0, eta >= 0, c > 0".into(),
        ));
    }
    let delta_cap = (cfg.g / cfg.r) * fp.s_n * fp.c_max;
    if fp.delta_n.is_nan() || fp.delta_n < 0.0 || fp.delta_n >= delta_cap {
        return Err(Error::InvalidParams(format!(
            "delta_n must lie in [0, (g/r) s_n C_max) = [0, {delta_cap}); got {}",
            fp.delta_n
        )));
    }
    let n = cfg.n as f64;
    let ratio = cfg.ratio();
    let beta = fp.s_n.ln() - fp.tau.ln();
    let entropy_branch = if n > 1.0 {
        fp.c * fp.eta / (ratio * ratio * fp.s_n * fp.s_n * n.ln().powi(2))
    } else {
        f64::INFINITY
    };
    let info_density_branch = cfg.g / (19.0 * fp.c_max * cfg.r * fp.s_n * beta * beta);
    let (exponent_rate, active) = if entropy_branch <= info_density_branch {
        (entropy_branch, "entropy_concentration")
    } else {
        (info_density_branch, "info_density_concentration")
    };
    let nr = n * cfg.r;
    let epsilon_bound = 11.0 / mass_f
        * (nr.sqrt() * (-n * fp.delta_n * fp.delta_n * exponent_rate).exp() + (-n * fp.delta_n).exp());
    let log_m_default = match kernel {
        Some(k) if k.rows() <= LOG_M_KERNEL_CAP => Some(
            mutual_info_lower_bound(cfg, k)?
                - 3.0 * n * fp.delta_n
                - 0.5 * (6.0 * std::f64::consts::PI * nr).ln(),
        ),
        _ => None,
    };
    Ok(FeinsteinReport {
        epsilon_bound,
        entropy_branch,
        info_density_branch,
        active_branch: active,
        log_m_default,
        vacuous: epsilon_bound >= 1.0 || epsilon_bound.is_nan(),
    })
}

/// Per-codeword mutual-information lower bound
/// n/2 ln r - n Psi(r/g) + 0.5 log det(W W^T), i.e. n times the
/// achievability expression. For square kernels the penalty term equals
/// log |det W| exactly.
pub fn mutual_info_lower_bound(cfg: &ChannelConfig, kernel: &TransitionKernel) -> Result<f64> {
    if kernel.cols() < kernel.rows() {
        return Err(Error::DimensionMismatch(format!(
            "mutual information lower bound needs m >= n, kernel is {}x{}",
            kernel.rows(),
            kernel.cols()
        )));
    }
    let n = cfg.n as f64;
    Ok(n * (0.5 * cfg.r.ln() - psi(cfg.ratio())?) + 0.5 * kernel.log_det_gram()?)
}
