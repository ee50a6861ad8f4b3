//! Transition kernels: construction, validation, conditioning analysis,
//! Kronecker powers, and the log-determinant noise penalty.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Total-entry cap for materialized Kronecker powers; the determinant
/// shortcut covers everything above it.
pub const DEFAULT_KRON_ENTRY_CAP: usize = 1_000_000;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row-stochastic n x m transition matrix with cached column statistics.
///
/// `entries[i][j]` is the probability that an input object of type `i` is
/// identified as output type `j`. Rows are renormalized on construction so the
/// stored matrix is row-stochastic to within 1e-12 even when the input only
/// met the 1e-9 ingestion tolerance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    rows: usize,
    cols: usize,
    entries: Vec<f64>, // row-major
    col_sums: Vec<f64>,
    min_positive_entry: f64,
    max_entry: f64,
}

impl TransitionKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DimensionMismatch("kernel needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::DimensionMismatch("kernel needs at least one column".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * cols);
        for r in &rows {
            flat.extend_from_slice(r);
        }
        Self::from_flat(n, cols, flat)
    }

    pub fn from_flat(rows: usize, cols: usize, mut entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} kernel with {} entries",
                entries.len()
            )));
        }
        for i in 0..rows {
            let row = &mut entries[i * cols..(i + 1) * cols];
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochasticRow { row: i, sum });
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        let mut col_sums = vec![0.0; cols];
        let mut min_pos = f64::INFINITY;
        let mut max = 0.0_f64;
        for i in 0..rows {
            for j in 0..cols {
                let v = entries[i * cols + j];
                col_sums[j] += v;
                if v > 0.0 && v < min_pos {
                    min_pos = v;
                }
                if v > max {
                    max = v;
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
            col_sums,
            min_positive_entry: min_pos,
            max_entry: max,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self::from_flat(n, n, entries).expect("identity is stochastic")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn min_positive_entry(&self) -> f64 {
        self.min_positive_entry
    }

    pub fn max_entry(&self) -> f64 {
        self.max_entry
    }

    /// Per-column condition number: max entry over smallest positive entry.
    pub fn condition_number(&self, j: usize) -> Result<f64> {
        let mut max = 0.0_f64;
        let mut min_pos = f64::INFINITY;
        for i in 0..self.rows {
            let v = self.entry(i, j);
            if v > 0.0 {
                min_pos = min_pos.min(v);
                max = max.max(v);
            }
        }
        if min_pos.is_infinite() {
            return Err(Error::AllZeroColumn { col: j });
        }
        Ok(max / min_pos)
    }

    /// Conditioning report against supplied (tau, eta, C_max).
    pub fn well_conditioned_report(&self, tau: f64, eta: f64, c_max: f64) -> Result<WellConditionReport> {
        if !(tau > 0.0 && tau <= 1.0) || eta < 0.0 || c_max <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "conditioning parameters must satisfy tau in (0,1], eta >= 0, C_max > 0; got ({tau}, {eta}, {c_max})"
            )));
        }
        let kappa: Vec<f64> = (0..self.cols)
            .map(|j| self.condition_number(j))
            .collect::<Result<_>>()?;
        let kappa_max = kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_col = self.col_sums.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_col = self.col_sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let n = self.rows as f64;
        let tau_achieved = 1.0 / kappa_max;
        let eta_achieved = if min_col >= 1.0 {
            0.0
        } else if self.rows == 1 {
            f64::INFINITY
        } else {
            -min_col.ln() / n.ln()
        };
        let slack = 1e-12;
        let passes = kappa_max <= 1.0 / tau * (1.0 + slack)
            && min_col >= n.powf(-eta) * (1.0 - slack)
            && max_col <= c_max * (1.0 + slack);
        Ok(WellConditionReport {
            kappa_per_column: kappa,
            tau_achieved,
            eta_achieved,
            cmax_achieved: max_col,
            passes,
            // + 0.0 normalizes the negative zero from -ln(1)
            minus_log_tau: -tau_achieved.ln() + 0.0,
        })
    }

    /// L-fold Kronecker power with row-major tuple index packing: entry
    /// [(i_1..i_L)][(j_1..j_L)] = prod_t w[i_t][j_t].
    pub fn kron_power(&self, l: u32) -> Result<TransitionKernel> {
        self.kron_power_with_cap(l, DEFAULT_KRON_ENTRY_CAP)
    }

    pub fn kron_power_with_cap(&self, l: u32, entry_cap: usize) -> Result<TransitionKernel> {
        if l == 0 {
            return Err(Error::ParameterOutOfRange("Kronecker power needs L >= 1".into()));
        }
        let out_rows = (self.rows as u128).checked_pow(l);
        let out_cols = (self.cols as u128).checked_pow(l);
        let total = out_rows.zip(out_cols).and_then(|(r, c)| r.checked_mul(c));
        match total {
            Some(t) if t <= entry_cap as u128 => {}
            other => {
                return Err(Error::DimensionOverflow {
                    entries: other.unwrap_or(u128::MAX),
                    cap: entry_cap,
                })
            }
        }
        let mut acc = self.clone();
        for _ in 1..l {
            acc = acc.kron_with(self);
        }
        Ok(acc)
    }

    fn kron_with(&self, other: &TransitionKernel) -> TransitionKernel {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut entries = vec![0.0; rows * cols];
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                let i = i1 * other.rows + i2;
                for j1 in 0..self.cols {
                    let a = self.entry(i1, j1);
                    if a == 0.0 {
                        continue;
                    }
                    for j2 in 0..other.cols {
                        entries[i * cols + j1 * other.cols + j2] = a * other.entry(i2, j2);
                    }
                }
            }
        }
        TransitionKernel::from_flat(rows, cols, entries).expect("kron of stochastic is stochastic")
    }

    /// log det(W W^T) via pivoted LU on the n x n Gram matrix, accumulating
    /// log-magnitudes so the result survives determinant underflow.
    pub fn log_det_gram(&self) -> Result<f64> {
        if self.cols < self.rows {
            return Err(Error::DimensionMismatch(format!(
                "Gram log-det needs m >= n, kernel is {}x{}",
                self.rows, self.cols
            )));
        }
        let w = DMatrix::from_row_slice(self.rows, self.cols, &self.entries);
        let gram = &w * w.transpose();
        let scale = gram.diagonal().amax();
        let lu = gram.lu();
        let u = lu.u();
        let tol = self.rows as f64 * f64::EPSILON * scale;
        let mut log_abs = 0.0;
        let mut sign = 1.0_f64;
        for i in 0..self.rows {
            let d = u[(i, i)];
            if !d.is_finite() || d.abs() <= tol {
                return Err(Error::SingularGram);
            }
            sign *= d.signum();
            log_abs += d.abs().ln();
        }
        sign *= lu.p().determinant::<f64>();
        if sign <= 0.0 {
            return Err(Error::SingularGram);
        }
        Ok(log_abs)
    }

    /// Determinant penalty Delta = log det(W W^T) / (2n), natural log.
    pub fn det_penalty(&self) -> Result<f64> {
        Ok(self.log_det_gram()? / (2.0 * self.rows as f64))
    }

    /// log det of the L-th Kronecker power's Gram matrix without
    /// materializing it: det((w^(x)L)(w^(x)L)^T) = det(w w^T)^(L a^(L-1))
    /// for an a x b base.
    pub fn kron_det_shortcut(&self, l: u32) -> Result<f64> {
        if l == 0 {
            return Err(Error::ParameterOutOfRange("Kronecker power needs L >= 1".into()));
        }
        let base = self.log_det_gram()?;
        Ok(l as f64 * (self.rows as f64).powi(l as i32 - 1) * base)
    }
}

/// Conditioning diagnostics per Definition of a well-conditioned kernel:
/// per-column max/min-positive ratios and column-sum bounds.
#[derive(Debug, Clone, Serialize)]
pub struct WellConditionReport {
    pub kappa_per_column: Vec<f64>,
    pub tau_achieved: f64,
    pub eta_achieved: f64,
    pub cmax_achieved: f64,
    pub passes: bool,
    pub minus_log_tau: f64,
}

/// Closed-form kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    Identity { n: usize },
    /// n x n symmetric substitution: diagonal 1-p, off-diagonal p/(n-1).
    GeneralSubstitution { n: usize, p: f64 },
    /// Single-nucleotide symmetric substitution over an alphabet of size a.
    DnaSubstitution { p: f64, alphabet_size: usize },
    /// Single-nucleotide erasure: w = [(1-eps) I_a | eps], an a x (a+1) kernel.
    DnaErasure { epsilon: f64, alphabet_size: usize },
}

impl KernelFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            KernelFamily::Identity { n } => {
                if n == 0 {
                    return Err(Error::ParameterOutOfRange("identity needs n >= 1".into()));
                }
            }
            KernelFamily::GeneralSubstitution { n, p } => {
                if n < 2 {
                    return Err(Error::ParameterOutOfRange("substitution needs n >= 2".into()));
                }
                if p.is_nan() || p < 0.0 || n as f64 * p / (n as f64 - 1.0) >= 1.0 {
                    return Err(Error::ParameterOutOfRange(format!(
                        "substitution needs 0 <= p and np/(n-1) < 1; got p = {p}, n = {n}"
                    )));
                }
            }
            KernelFamily::DnaSubstitution { p, alphabet_size } => {
                let a = alphabet_size;
                if a < 2 {
                    return Err(Error::ParameterOutOfRange("alphabet size must be >= 2".into()));
                }
                if p.is_nan() || p < 0.0 || a as f64 * p / (a as f64 - 1.0) >= 1.0 {
                    return Err(Error::ParameterOutOfRange(format!(
                        "substitution needs 0 <= p and |A|p/(|A|-1) < 1; got p = {p}, |A| = {a}"
                    )));
                }
            }
            KernelFamily::DnaErasure { epsilon, alphabet_size } => {
                let a = alphabet_size;
                if a == 0 {
                    return Err(Error::ParameterOutOfRange("alphabet size must be >= 1".into()));
                }
                // eps < 1/|A| keeps the erasure-column sum |A| eps below 1,
                // which the conditioning assumption needs.
                if epsilon.is_nan() || epsilon < 0.0 || epsilon >= 1.0 / a as f64 {
                    return Err(Error::ParameterOutOfRange(format!(
                        "erasure needs 0 <= eps < 1/|A|; got eps = {epsilon}, |A| = {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Materializes the family's base kernel.
    pub fn make(&self) -> Result<TransitionKernel> {
        self.validate()?;
        let kernel = match *self {
            KernelFamily::Identity { n } => TransitionKernel::identity(n),
            KernelFamily::GeneralSubstitution { n, p } => symmetric_substitution(n, p),
            KernelFamily::DnaSubstitution { p, alphabet_size } => {
                symmetric_substitution(alphabet_size, p)
            }
            KernelFamily::DnaErasure { epsilon, alphabet_size } => {
                let a = alphabet_size;
                let mut entries = vec![0.0; a * (a + 1)];
                for i in 0..a {
                    entries[i * (a + 1) + i] = 1.0 - epsilon;
                    entries[i * (a + 1) + a] = epsilon;
                }
                TransitionKernel::from_flat(a, a + 1, entries)?
            }
        };
        Ok(kernel)
    }

    /// Closed-form determinant penalty of the L-th Kronecker power,
    /// (1/(2 n^L)) log det(W W^T) with W = w^(x)L. At L = 1 this is the Delta
    /// of the DNA corollary, (1/(2|A|)) log det(w w^T).
    pub fn closed_form_penalty(&self, l: u32) -> Result<f64> {
        self.validate()?;
        if l == 0 {
            return Err(Error::ParameterOutOfRange("Kronecker power needs L >= 1".into()));
        }
        let per_level = match *self {
            KernelFamily::Identity { .. } => return Err(Error::NoClosedForm),
            KernelFamily::GeneralSubstitution { n, p } => {
                let nf = n as f64;
                (nf - 1.0) / nf * (1.0 - nf * p / (nf - 1.0)).ln()
            }
            KernelFamily::DnaSubstitution { p, alphabet_size } => {
                let a = alphabet_size as f64;
                (a - 1.0) / a * (1.0 - a * p / (a - 1.0)).ln()
            }
            KernelFamily::DnaErasure { epsilon, alphabet_size } => {
                let a = alphabet_size as f64;
                let lead = (1.0 - epsilon).powi(2) + a * epsilon * epsilon;
                (lead.ln() + 2.0 * (a - 1.0) * (1.0 - epsilon).ln()) / (2.0 * a)
            }
        };
        Ok(l as f64 * per_level)
    }
}

fn symmetric_substitution(n: usize, p: f64) -> TransitionKernel {
    let off = p / (n as f64 - 1.0);
    let mut entries = vec![off; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0 - p;
    }
    TransitionKernel::from_flat(n, n, entries).expect("substitution family is stochastic")
}
