//! Command-line interface. Exit codes: 0 success, 1 domain error, 2 usage
//! error. Every randomized command requires --seed and echoes it in its
//! output so runs are reproducible; FREQCAP_THREADS caps the worker count.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{achievability_bound, dna_rate_bound, Conditioning, DnaParams};
use crate::channel::{
    output_probs, poisson_intensities, sample_multinomial, sample_poissonized, ChannelConfig,
    CountVector,
};
use crate::entropy::poisson_entropy;
use crate::error::{Error, Result};
use crate::experiments::{
    constraint_set_probability, random_coding_experiment, reproduce_examples, rows_to_csv,
    CodebookSpec, CodingExperimentSpec, Decoder,
};
use crate::infodensity::{
    concentration_experiment, enumerate_marginal, exact_mutual_information,
    lipschitz_seminorm_bruteforce, mc_mutual_information, EnumeratedMarginal, InputPrior,
    JointMode,
};
use crate::io;
use crate::kernel::TransitionKernel;
use crate::rng::derive_rng;

#[derive(Parser)]
#[command(
    name = "freqcap",
    about = "Noisy frequency-based channel toolkit: kernels, capacity bounds, sampling, concentration",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel ingestion and conditioning reports
    Kernel {
        #[command(subcommand)]
        cmd: KernelCmd,
    },
    /// Poisson-entropy evaluation
    Entropy {
        #[command(subcommand)]
        cmd: EntropyCmd,
    },
    /// Channel sampling
    Channel {
        #[command(subcommand)]
        cmd: ChannelCmd,
    },
    /// Information density, mutual information, concentration
    Infodensity {
        #[command(subcommand)]
        cmd: InfoCmd,
    },
    /// Capacity bounds
    Bounds {
        #[command(subcommand)]
        cmd: BoundsCmd,
    },
    /// Random-coding and constraint-mass experiments
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
    /// Closed-form example table over the default parameter grids
    Reproduce {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Well-conditioning report; (tau, eta, cmax) default to achieved values
    Report {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        cmax: Option<f64>,
    },
}

#[derive(Subcommand)]
enum EntropyCmd {
    /// Entropy of a Poisson variable, with truncation diagnostics
    Eval {
        #[arg(long)]
        lambda: f64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum SampleMode {
    Multinomial,
    Poisson,
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Sample output histograms, one CSV line per trial
    Sample {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum)]
        mode: SampleMode,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long)]
    kernel: PathBuf,
    /// Prior: uniform | gamma | gamma:<shape> | csv:<path>
    #[arg(long, default_value = "gamma")]
    prior: String,
    /// Support cap s_n
    #[arg(long)]
    s: usize,
    #[arg(long)]
    g: f64,
    #[arg(long)]
    r: f64,
    /// Per-coordinate output truncation; 0 picks a cap from the intensities
    #[arg(long, default_value_t = 0)]
    zcap: usize,
}

#[derive(Subcommand)]
enum InfoCmd {
    /// Monte Carlo mutual information, with the exact value when enumerable
    Mi {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Brute-forced Lipschitz semi-norm of the information density
    Lipschitz {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Count vector to condition on; default scans the prior support
        #[arg(long)]
        x: Option<PathBuf>,
    },
    /// Empirical lower tails against the Bobkov-Ledoux curve
    Concentration {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated deviation grid
        #[arg(long, default_value = "0.05,0.1,0.2,0.5")]
        deltas: String,
        /// Talagrand constant c
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Converse and achievability bounds for a kernel
    Eval {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        cmax: Option<f64>,
        /// Also require the finite-n hypothesis proxy -ln(tau) <= sqrt(n)
        #[arg(long)]
        strict: bool,
    },
    /// DNA short-molecule corollary rate
    Dna {
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 4)]
        alphabet: usize,
        #[arg(long)]
        reads: f64,
        /// Noise model: erasure:<eps> | substitution:<p>
        #[arg(long)]
        noise: String,
        /// Hard error when beta is outside the corollary regime
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Random-coding error estimate
    Coding {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, default_value = "uniform")]
        prior: String,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        r: f64,
        /// Codebook: iid:<M> | fn:<M> | <path.csv> (one codeword per line)
        #[arg(long)]
        codebook: String,
        /// Decoder: ml | threshold:<ln_gamma>
        #[arg(long, default_value = "ml")]
        decoder: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Monte Carlo mass of the constraint set sum x_i = n g
    ConstraintMass {
        #[arg(long, default_value = "gamma")]
        prior: String,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}

/// Entry point used by main() and by tests; never calls process::exit.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn parse_prior(spec: &str, g: f64, s: usize) -> Result<InputPrior> {
    match spec {
        "uniform" => InputPrior::uniform(s),
        "gamma" => InputPrior::gamma(g, s, 0.5),
        other => {
            if let Some(shape) = other.strip_prefix("gamma:") {
                let shape: f64 = shape
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad gamma shape {shape:?}: {e}")))?;
                InputPrior::gamma(g, s, shape)
            } else if let Some(path) = other.strip_prefix("csv:") {
                let pmf = io::parse_pmf_csv(&std::fs::read_to_string(path)?)?;
                InputPrior::from_pmf(pmf)
            } else {
                Err(Error::UsageError(format!(
                    "prior must be uniform, gamma, gamma:<shape>, or csv:<path>; got {other:?}"
                )))
            }
        }
    }
}

fn parse_noise(spec: &str, alphabet: usize) -> Result<TransitionKernel> {
    let (kind, value) = spec.split_once(':').ok_or_else(|| {
        Error::UsageError(format!("noise must be erasure:<eps> or substitution:<p>; got {spec:?}"))
    })?;
    let value: f64 = value
        .parse()
        .map_err(|e| Error::Parse(format!("bad noise level {value:?}: {e}")))?;
    match kind {
        "erasure" => crate::kernel::KernelFamily::DnaErasure {
            epsilon: value,
            alphabet_size: alphabet,
        }
        .make(),
        "substitution" => crate::kernel::KernelFamily::DnaSubstitution {
            p: value,
            alphabet_size: alphabet,
        }
        .make(),
        other => Err(Error::UsageError(format!(
            "noise kind must be erasure or substitution; got {other:?}"
        ))),
    }
}

fn auto_zcap(requested: usize, kernel: &TransitionKernel, cfg: &ChannelConfig, s: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    let max_col = kernel.col_sums().iter().cloned().fold(0.0_f64, f64::max);
    let lambda_max = cfg.ratio() * s as f64 * max_col;
    (lambda_max + 12.0 * (lambda_max + 1.0).sqrt() + 30.0).ceil() as usize
}

fn build_marginal(
    prior: &InputPrior,
    kernel: &TransitionKernel,
    cfg: &ChannelConfig,
    zcap: usize,
) -> Result<(EnumeratedMarginal, JointMode)> {
    match enumerate_marginal(prior, kernel, cfg, zcap, JointMode::FullJoint) {
        Ok(m) => Ok((m, JointMode::FullJoint)),
        Err(Error::StateSpaceTooLarge { .. }) => Ok((
            enumerate_marginal(prior, kernel, cfg, zcap, JointMode::ProductOfMarginals)?,
            JointMode::ProductOfMarginals,
        )),
        Err(e) => Err(e),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    emit(&text)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Kernel { cmd } => match cmd {
            KernelCmd::Report { kernel, tau, eta, cmax } => {
                let k = io::read_kernel_csv(&kernel)?;
                let achieved = k.well_conditioned_report(1.0, 0.0, 1.0)?;
                let report = k.well_conditioned_report(
                    tau.unwrap_or(achieved.tau_achieved.min(1.0)),
                    eta.unwrap_or(if achieved.eta_achieved.is_finite() {
                        achieved.eta_achieved
                    } else {
                        0.0
                    }),
                    cmax.unwrap_or(achieved.cmax_achieved),
                )?;
                print_json(&report)
            }
        },
        Command::Entropy { cmd } => match cmd {
            EntropyCmd::Eval { lambda } => print_json(&poisson_entropy(lambda)?),
        },
        Command::Channel { cmd } => match cmd {
            ChannelCmd::Sample { kernel, x, g, r, mode, trials, seed } => {
                let k = io::read_kernel_csv(&kernel)?;
                let x = io::read_counts_csv(&x)?;
                let cfg = ChannelConfig::new(k.rows(), k.cols(), g, r)?;
                let mut out = String::new();
                out.push_str(&format!("# seed={seed}\n"));
                match mode {
                    SampleMode::Multinomial => {
                        let p = output_probs(&x, &k, &cfg)?;
                        for t in 0..trials {
                            let rng = derive_rng(seed, crate::rng::stream::CHANNEL, t);
                            let h = sample_multinomial(&p, cfg.total_samples(), &rng)?;
                            push_counts(&mut out, &h.counts);
                        }
                    }
                    SampleMode::Poisson => {
                        let lambda = poisson_intensities(&x, &k, &cfg)?;
                        for t in 0..trials {
                            let rng = derive_rng(seed, crate::rng::stream::CHANNEL, t);
                            let h = sample_poissonized(&lambda, &rng);
                            push_counts(&mut out, &h.counts);
                        }
                    }
                }
                emit(&out)
            }
        },
        Command::Infodensity { cmd } => match cmd {
            InfoCmd::Mi { instance, trials, seed } => {
                let (k, prior, cfg, zcap) = load_instance(&instance)?;
                let (marginal, mode) = build_marginal(&prior, &k, &cfg, zcap)?;
                let mc = mc_mutual_information(&prior, &k, &cfg, &marginal, trials, seed)?;
                let exact = match mode {
                    JointMode::FullJoint => Some(exact_mutual_information(&marginal, &cfg)?.value),
                    JointMode::ProductOfMarginals => None,
                };
                #[derive(Serialize)]
                struct MiReport {
                    mc_mean: f64,
                    mc_std_error: f64,
                    exact: Option<f64>,
                    joint_mode: JointMode,
                    zcap: usize,
                    trials: u64,
                    seed: u64,
                }
                print_json(&MiReport {
                    mc_mean: mc.mean,
                    mc_std_error: mc.std_error,
                    exact,
                    joint_mode: mode,
                    zcap,
                    trials,
                    seed,
                })
            }
            InfoCmd::Lipschitz { instance, x } => {
                let (k, prior, cfg, zcap) = load_instance(&instance)?;
                let marginal =
                    enumerate_marginal(&prior, &k, &cfg, zcap, JointMode::ProductOfMarginals)?;
                let box_cap = zcap - 1;
                let (measured, scanned) = match x {
                    Some(path) => {
                        let x = io::read_counts_csv(&path)?;
                        (
                            lipschitz_seminorm_bruteforce(&x, &marginal, &k, &cfg, box_cap)?,
                            1u64,
                        )
                    }
                    None => {
                        // sup over the prior support box
                        let support = prior.support();
                        let states = (support.len() as u128).pow(cfg.n as u32);
                        if states > crate::infodensity::JOINT_STATE_CAP as u128 {
                            return Err(Error::StateSpaceTooLarge {
                                states,
                                cap: crate::infodensity::JOINT_STATE_CAP,
                            });
                        }
                        let mut worst = 0.0_f64;
                        let mut scanned = 0u64;
                        let mut idx = vec![0usize; cfg.n];
                        loop {
                            let x = CountVector(idx.iter().map(|&i| support[i]).collect());
                            worst = worst.max(lipschitz_seminorm_bruteforce(
                                &x, &marginal, &k, &cfg, box_cap,
                            )?);
                            scanned += 1;
                            let mut pos = cfg.n;
                            loop {
                                if pos == 0 {
                                    break;
                                }
                                pos -= 1;
                                idx[pos] += 1;
                                if idx[pos] < support.len() {
                                    break;
                                }
                                idx[pos] = 0;
                            }
                            if pos == 0 && idx[0] == 0 {
                                break;
                            }
                        }
                        (worst, scanned)
                    }
                };
                let rep = k.well_conditioned_report(1.0, 0.0, 1.0)?;
                #[derive(Serialize)]
                struct LipschitzReport {
                    beta_lip_measured: f64,
                    beta_lip_bound: f64,
                    ln_s: f64,
                    minus_log_tau: f64,
                    inputs_scanned: u64,
                    zcap: usize,
                }
                print_json(&LipschitzReport {
                    beta_lip_measured: measured,
                    beta_lip_bound: (prior.s_n() as f64).ln() + rep.minus_log_tau,
                    ln_s: (prior.s_n() as f64).ln(),
                    minus_log_tau: rep.minus_log_tau,
                    inputs_scanned: scanned,
                    zcap,
                })
            }
            InfoCmd::Concentration { instance, trials, seed, deltas, c } => {
                let (k, prior, cfg, zcap) = load_instance(&instance)?;
                let marginal =
                    enumerate_marginal(&prior, &k, &cfg, zcap, JointMode::ProductOfMarginals)?;
                let delta_grid: Vec<f64> = deltas
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("bad delta {tok:?}: {e}")))
                    })
                    .collect::<Result<_>>()?;
                let report = concentration_experiment(
                    &prior, &k, &cfg, &marginal, trials, &delta_grid, seed, c,
                )?;
                print_json(&report)
            }
        },
        Command::Bounds { cmd } => match cmd {
            BoundsCmd::Eval { kernel, g, r, tau, eta, cmax, strict } => {
                let k = io::read_kernel_csv(&kernel)?;
                let cfg = ChannelConfig::new(k.rows(), k.cols(), g, r)?;
                let achieved = k.well_conditioned_report(1.0, 0.0, 1.0)?;
                if strict && achieved.minus_log_tau > (k.rows() as f64).sqrt() {
                    return Err(Error::NotWellConditioned(format!(
                        "-ln(tau) = {} exceeds sqrt(n) = {}; the achievability hypothesis proxy fails at this n",
                        achieved.minus_log_tau,
                        (k.rows() as f64).sqrt()
                    )));
                }
                let report = achievability_bound(
                    &cfg,
                    &k,
                    Conditioning {
                        tau: tau.unwrap_or(achieved.tau_achieved.min(1.0)),
                        eta: eta.unwrap_or(if achieved.eta_achieved.is_finite() {
                            achieved.eta_achieved
                        } else {
                            0.0
                        }),
                        c_max: cmax.unwrap_or(achieved.cmax_achieved),
                    },
                )?;
                print_json(&report)
            }
            BoundsCmd::Dna { k, beta, alphabet, reads, noise, strict } => {
                let w = parse_noise(&noise, alphabet)?;
                let dna = DnaParams::new(k, beta, alphabet, reads)?;
                let report = dna_rate_bound(&dna, &w, strict)?;
                print_json(&report)
            }
        },
        Command::Experiment { cmd } => match cmd {
            ExperimentCmd::Coding {
                kernel,
                prior,
                s,
                g,
                r,
                codebook,
                decoder,
                trials,
                seed,
            } => {
                let k = io::read_kernel_csv(&kernel)?;
                let cfg = ChannelConfig::new(k.rows(), k.cols(), g, r)?;
                let prior = parse_prior(&prior, g, s)?;
                let codebook = if let Some(m) = codebook.strip_prefix("iid:") {
                    CodebookSpec::RandomIid {
                        m: m.parse().map_err(|e| Error::Parse(format!("bad M: {e}")))?,
                    }
                } else if let Some(m) = codebook.strip_prefix("fn:") {
                    CodebookSpec::RandomConstrained {
                        m: m.parse().map_err(|e| Error::Parse(format!("bad M: {e}")))?,
                    }
                } else {
                    let text = std::fs::read_to_string(&codebook)?;
                    let words: Vec<Vec<u64>> = text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(|l| io::parse_counts_csv(l).map(|c| c.0))
                        .collect::<Result<_>>()?;
                    CodebookSpec::Fixed(words)
                };
                let decoder = if decoder == "ml" {
                    Decoder::MaxLikelihood
                } else if let Some(gamma) = decoder.strip_prefix("threshold:") {
                    Decoder::Threshold {
                        ln_gamma: gamma
                            .parse()
                            .map_err(|e| Error::Parse(format!("bad threshold: {e}")))?,
                    }
                } else {
                    return Err(Error::UsageError(format!(
                        "decoder must be ml or threshold:<ln_gamma>; got {decoder:?}"
                    )));
                };
                let marginal = if matches!(decoder, Decoder::Threshold { .. }) {
                    let zcap = auto_zcap(0, &k, &cfg, s).max(cfg.total_samples() as usize + 20);
                    Some(enumerate_marginal(&prior, &k, &cfg, zcap, JointMode::FullJoint)?)
                } else {
                    None
                };
                let spec = CodingExperimentSpec {
                    codebook,
                    cfg,
                    kernel: k,
                    prior,
                    decoder,
                    trials,
                    seed,
                };
                print_json(&random_coding_experiment(&spec, marginal.as_ref())?)
            }
            ExperimentCmd::ConstraintMass { prior, s, n, g, trials, seed } => {
                let prior = parse_prior(&prior, g, s)?;
                print_json(&constraint_set_probability(&prior, n, g, trials, seed)?)
            }
        },
        Command::Reproduce { format } => {
            let rows = reproduce_examples()?;
            match format {
                Format::Csv => emit(&rows_to_csv(&rows))?,
                Format::Json => print_json(&rows)?,
            }
            Ok(())
        }
    }
}

fn load_instance(args: &InstanceArgs) -> Result<(TransitionKernel, InputPrior, ChannelConfig, usize)> {
    let k = io::read_kernel_csv(&args.kernel)?;
    let cfg = ChannelConfig::new(k.rows(), k.cols(), args.g, args.r)?;
    let prior = parse_prior(&args.prior, args.g, args.s)?;
    let zcap = auto_zcap(args.zcap, &k, &cfg, args.s);
    Ok((k, prior, cfg, zcap))
}

fn push_counts(out: &mut String, counts: &[u64]) {
    let line = counts
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",");
    out.push_str(&line);
    out.push('\n');
}
