//! Exact output marginals at tiny scale.
//!
//! The per-coordinate marginal P_{Z_j}(z) = sum_x P(x) Pois(z; lambda_j(x))
//! is computed exactly by first convolving the laws of the independent
//! summands X_i W[i][j] into the law of S_j = sum_i X_i W[i][j], then mixing
//! Poisson pmfs over that law. Full-joint mode additionally enumerates the
//! whole input box so joint densities (and exact mutual information) are
//! available; the product-of-marginals mode stays exact per coordinate but
//! approximates joint densities by independence.

use serde::Serialize;

use crate::channel::ChannelConfig;
use crate::entropy::{poisson_entropy, poisson_log_pmf};
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;

use super::prior::InputPrior;

/// Cap on enumerated joint input states s_n^n.
pub const JOINT_STATE_CAP: u64 = 100_000;
/// Cap on the support of one convolved column law.
const COLUMN_LAW_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JointMode {
    ProductOfMarginals,
    FullJoint,
}

/// Enumerated joint input support: every x in supp(P_X)^n with its log-mass
/// and per-coordinate intensities.
#[derive(Debug, Clone)]
pub struct JointSupport {
    pub states: Vec<Vec<u64>>,
    pub log_px: Vec<f64>,
    pub lambdas: Vec<Vec<f64>>,
}

/// Exact tiny-scale marginal tables for the Poissonized channel output.
#[derive(Debug, Clone)]
pub struct EnumeratedMarginal {
    z_cap: usize,
    /// logp[j][z] = ln P_{Z_j}(z) for z in 0..=z_cap.
    logp: Vec<Vec<f64>>,
    /// Per-coordinate truncation tails 1 - sum_z P_{Z_j}(z).
    tails: Vec<f64>,
    /// Law of S_j = sum_i X_i W[i][j] per coordinate, for on-demand
    /// evaluation beyond the table cap.
    column_laws: Vec<Vec<(f64, f64)>>,
    ratio: f64,
    joint_mode: JointMode,
    joint: Option<JointSupport>,
}

impl EnumeratedMarginal {
    pub fn z_cap(&self) -> usize {
        self.z_cap
    }

    pub fn joint_mode(&self) -> JointMode {
        self.joint_mode
    }

    pub fn joint_support(&self) -> Option<&JointSupport> {
        self.joint.as_ref()
    }

    pub fn tail(&self, j: usize) -> f64 {
        self.tails[j]
    }

    /// ln P_{Z_j}(z); errors past the truncation cap.
    pub fn log_marginal(&self, j: usize, z: u64) -> Result<f64> {
        if z as usize > self.z_cap {
            return Err(Error::TruncationExceeded {
                value: z,
                cap: self.z_cap,
            });
        }
        Ok(self.logp[j][z as usize])
    }

    /// ln P_{Z_j}(z) for any z: table lookup inside the cap, log-sum-exp over
    /// the column law beyond it.
    pub fn log_marginal_unbounded(&self, j: usize, z: u64) -> f64 {
        if z as usize <= self.z_cap {
            return self.logp[j][z as usize];
        }
        let mut max = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(self.column_laws[j].len());
        for &(s, p) in &self.column_laws[j] {
            if p == 0.0 {
                continue;
            }
            let lp = p.ln() + poisson_log_pmf(z, self.ratio * s);
            if lp > max {
                max = lp;
            }
            terms.push(lp);
        }
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        max + terms.iter().map(|lp| (lp - max).exp()).sum::<f64>().ln()
    }

    /// ln P_{Z^m}(z) for any z, matching [`Self::log_joint`] inside the box.
    pub fn log_joint_unbounded(&self, z: &[u64]) -> f64 {
        match self.joint_mode {
            JointMode::ProductOfMarginals => z
                .iter()
                .enumerate()
                .map(|(j, &zj)| self.log_marginal_unbounded(j, zj))
                .sum(),
            JointMode::FullJoint => self.log_joint(z).expect("full joint has no cap"),
        }
    }

    /// ln P_{Z^m}(z^m). Product mode multiplies per-coordinate marginals;
    /// full-joint mode evaluates the exact mixture, falling back to a direct
    /// state sum for z outside the table box.
    pub fn log_joint(&self, z: &[u64]) -> Result<f64> {
        match self.joint_mode {
            JointMode::ProductOfMarginals => {
                let mut lp = 0.0;
                for (j, &zj) in z.iter().enumerate() {
                    lp += self.log_marginal(j, zj)?;
                }
                Ok(lp)
            }
            JointMode::FullJoint => {
                let joint = self.joint.as_ref().expect("full joint support present");
                let mut max = f64::NEG_INFINITY;
                let mut terms = Vec::with_capacity(joint.states.len());
                for (lpx, lambda) in joint.log_px.iter().zip(&joint.lambdas) {
                    let mut lp = *lpx;
                    for (j, &zj) in z.iter().enumerate() {
                        lp += poisson_log_pmf(zj, lambda[j]);
                    }
                    if lp > max {
                        max = lp;
                    }
                    terms.push(lp);
                }
                if max == f64::NEG_INFINITY {
                    return Ok(f64::NEG_INFINITY);
                }
                let sum: f64 = terms.iter().map(|lp| (lp - max).exp()).sum();
                Ok(max + sum.ln())
            }
        }
    }
}

/// Law of a discrete real-valued sum, kept as sorted (value, prob) pairs.
fn convolve_column(prior: &InputPrior, kernel: &TransitionKernel, j: usize) -> Result<Vec<(f64, f64)>> {
    let support = prior.support();
    let mut law: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for i in 0..kernel.rows() {
        let w = kernel.entry(i, j);
        let mut next: std::collections::BTreeMap<u64, (f64, f64)> = Default::default();
        for &(v, pv) in &law {
            for &x in &support {
                let value = v + x as f64 * w;
                let p = pv * prior.prob(x);
                // merge by bit pattern; values built in the same i-order
                // collide exactly when mathematically equal
                let e = next.entry(value.to_bits()).or_insert((value, 0.0));
                e.1 += p;
            }
        }
        if next.len() > COLUMN_LAW_CAP {
            return Err(Error::StateSpaceTooLarge {
                states: next.len() as u128,
                cap: COLUMN_LAW_CAP as u64,
            });
        }
        law = next.into_values().collect();
    }
    Ok(law)
}

/// Exact mixture marginal of the Poissonized output under `prior`^n.
pub fn enumerate_marginal(
    prior: &InputPrior,
    kernel: &TransitionKernel,
    cfg: &ChannelConfig,
    z_cap: usize,
    mode: JointMode,
) -> Result<EnumeratedMarginal> {
    if kernel.rows() != cfg.n || kernel.cols() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "kernel is {}x{}, config is ({}, {})",
            kernel.rows(),
            kernel.cols(),
            cfg.n,
            cfg.m
        )));
    }
    let ratio = cfg.ratio();
    let mut logp = Vec::with_capacity(cfg.m);
    let mut tails = Vec::with_capacity(cfg.m);
    let mut column_laws = Vec::with_capacity(cfg.m);
    for j in 0..cfg.m {
        let law = convolve_column(prior, kernel, j)?;
        let mut table = vec![0.0_f64; z_cap + 1];
        for &(s, p) in &law {
            if p == 0.0 {
                continue;
            }
            let lambda = ratio * s;
            for (z, t) in table.iter_mut().enumerate() {
                *t += p * poisson_log_pmf(z as u64, lambda).exp();
            }
        }
        let mass: f64 = table.iter().sum();
        tails.push((1.0 - mass).max(0.0));
        logp.push(table.into_iter().map(|p| p.ln()).collect());
        column_laws.push(law);
    }

    let joint = match mode {
        JointMode::ProductOfMarginals => None,
        JointMode::FullJoint => {
            let support = prior.support();
            let states_count = (support.len() as u64).checked_pow(cfg.n as u32);
            match states_count {
                Some(c) if c <= JOINT_STATE_CAP => {}
                other => {
                    return Err(Error::StateSpaceTooLarge {
                        states: other.map(u128::from).unwrap_or(u128::MAX),
                        cap: JOINT_STATE_CAP,
                    })
                }
            }
            let mut states = Vec::new();
            let mut stack = vec![0usize; cfg.n];
            loop {
                states.push(stack.iter().map(|&ix| support[ix]).collect::<Vec<u64>>());
                // odometer increment
                let mut pos = cfg.n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    stack[pos] += 1;
                    if stack[pos] < support.len() {
                        break;
                    }
                    stack[pos] = 0;
                }
                if pos == 0 && stack[0] == 0 {
                    break;
                }
            }
            let log_px: Vec<f64> = states
                .iter()
                .map(|x| x.iter().map(|&xi| prior.prob(xi).ln()).sum())
                .collect();
            let lambdas: Vec<Vec<f64>> = states
                .iter()
                .map(|x| {
                    (0..cfg.m)
                        .map(|j| ratio * x.iter().enumerate().map(|(i, &xi)| xi as f64 * kernel.entry(i, j)).sum::<f64>())
                        .collect()
                })
                .collect();
            Some(JointSupport {
                states,
                log_px,
                lambdas,
            })
        }
    };

    Ok(EnumeratedMarginal {
        z_cap,
        logp,
        tails,
        column_laws,
        ratio,
        joint_mode: mode,
        joint,
    })
}

/// Exact mutual information with its truncation diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExactMi {
    /// I(X; Z) = H(Z) - H(Z|X) over the truncated output box.
    pub value: f64,
    /// Joint output mass beyond the box; H(Z|X) itself is truncation-free.
    pub z_tail_mass: f64,
}

/// Exact mutual information I(X^n; Z^m) by full-joint enumeration, computed
/// as H(Z) - H(Z|X) with the z-box truncated at the marginal's cap.
pub fn exact_mutual_information(marginal: &EnumeratedMarginal, cfg: &ChannelConfig) -> Result<ExactMi> {
    let joint = marginal.joint_support().ok_or_else(|| {
        Error::InvalidParams("exact mutual information needs a full-joint marginal".into())
    })?;
    let box_size = (marginal.z_cap as u128 + 1).checked_pow(cfg.m as u32);
    match box_size {
        Some(b) if b <= 5_000_000 => {}
        other => {
            return Err(Error::StateSpaceTooLarge {
                states: other.unwrap_or(u128::MAX),
                cap: 5_000_000,
            })
        }
    }

    // H(Z|X) is additive over coordinates given x; no z-truncation at all.
    let mut h_z_given_x = 0.0;
    for (lpx, lambda) in joint.log_px.iter().zip(&joint.lambdas) {
        let px = lpx.exp();
        for &l in lambda {
            h_z_given_x += px * poisson_entropy(l)?.value;
        }
    }

    // H(Z) over the truncated box via the exact mixture.
    let mut h_z = 0.0;
    let mut mass = 0.0;
    let mut z = vec![0u64; cfg.m];
    loop {
        let lp = marginal.log_joint(&z)?;
        if lp > f64::NEG_INFINITY {
            let p = lp.exp();
            h_z -= p * lp;
            mass += p;
        }
        let mut pos = cfg.m;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            z[pos] += 1;
            if z[pos] as usize <= marginal.z_cap {
                break;
            }
            z[pos] = 0;
        }
        if pos == 0 && z[0] == 0 {
            break;
        }
    }
    Ok(ExactMi {
        value: h_z - h_z_given_x,
        z_tail_mass: (1.0 - mass).max(0.0),
    })
}
