//! Reproduction table for the closed-form kernel families: spectra, penalty
//! terms by closed form and by numeric factorization, conditioning
//! statistics, and the DNA-corollary rate at reference parameters.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bounds::{dna_rate_bound, DnaParams};
use crate::error::Result;
use crate::kernel::KernelFamily;

/// Reference DNA parameters for the corollary column: K = 1e6 molecules,
/// beta = 0.6 (inside the regime for |A| = 4), N = K reads.
const REF_K: f64 = 1e6;
const REF_BETA: f64 = 0.6;
const REF_READS: f64 = 1e6;

#[derive(Debug, Clone, Serialize)]
pub struct ExampleRow {
    pub family: String,
    pub parameter: f64,
    /// Spectrum of the kernel itself for the square families, of the Gram
    /// matrix w w^T for the erasure family.
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_of: &'static str,
    pub delta_closed_form: f64,
    pub delta_numeric: f64,
    pub kappa_max: f64,
    pub tau_achieved: f64,
    pub eta_achieved: Option<f64>,
    pub cmax_achieved: f64,
    pub minus_log_tau: f64,
    /// Corollary rate at the reference DNA parameters; absent for the
    /// non-DNA family.
    pub dna_rate: Option<f64>,
}

fn spectrum(matrix: DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(matrix);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

fn row_for(family: KernelFamily, label: &str, parameter: f64) -> Result<ExampleRow> {
    let kernel = family.make()?;
    let delta_closed = family.closed_form_penalty(1)?;
    let (eigenvalues, eigenvalues_of, delta_numeric) = match family {
        KernelFamily::DnaErasure { .. } => {
            let w = DMatrix::from_row_slice(kernel.rows(), kernel.cols(), kernel.entries());
            let gram = &w * w.transpose();
            let vals = spectrum(gram);
            // numeric penalty via the eigenvalues of the Gram matrix
            let delta: f64 = vals.iter().map(|v| v.ln()).sum::<f64>() / (2.0 * kernel.rows() as f64);
            (vals, "gram", delta)
        }
        _ => {
            let w = DMatrix::from_row_slice(kernel.rows(), kernel.cols(), kernel.entries());
            let vals = spectrum(w);
            let delta: f64 = vals.iter().map(|v| v.abs().ln()).sum::<f64>() / kernel.rows() as f64;
            (vals, "kernel", delta)
        }
    };
    // conditioning stats; the erasure column at eps = 0 is all-zero, in
    // which case kappa and tau are undefined and reported as such
    let (kappa_max, tau, eta, cmax, mlt) = match kernel.well_conditioned_report(1.0, 0.0, 1.0) {
        Ok(rep) => {
            let kmax = rep.kappa_per_column.iter().cloned().fold(0.0, f64::max);
            (
                kmax,
                rep.tau_achieved,
                if rep.eta_achieved.is_finite() { Some(rep.eta_achieved) } else { None },
                rep.cmax_achieved,
                rep.minus_log_tau,
            )
        }
        Err(_) => (
            f64::NAN,
            f64::NAN,
            None,
            kernel.col_sums().iter().cloned().fold(0.0, f64::max),
            f64::NAN,
        ),
    };
    let dna_rate = match family {
        KernelFamily::DnaSubstitution { .. } | KernelFamily::DnaErasure { .. } => {
            let dna = DnaParams::new(REF_K, REF_BETA, 4, REF_READS)?;
            // eps = 0 reduces to the noiseless corollary with w = I: the
            // materialized [I | 0] has a massless column that Def. 1 rejects
            let noiseless = KernelFamily::Identity { n: 4 }.make()?;
            let w = if matches!(family, KernelFamily::DnaErasure { epsilon, .. } if epsilon == 0.0) {
                &noiseless
            } else {
                &kernel
            };
            Some(dna_rate_bound(&dna, w, true)?.rate)
        }
        _ => None,
    };
    Ok(ExampleRow {
        family: label.to_string(),
        parameter,
        eigenvalues,
        eigenvalues_of,
        delta_closed_form: delta_closed,
        delta_numeric,
        kappa_max,
        tau_achieved: tau,
        eta_achieved: eta,
        cmax_achieved: cmax,
        minus_log_tau: mlt,
        dna_rate,
    })
}

/// Default parameter grids: substitution p and erasure eps.
pub fn reproduce_examples() -> Result<Vec<ExampleRow>> {
    let mut rows = Vec::new();
    for &p in &[0.0, 0.01, 0.05, 0.1] {
        rows.push(row_for(
            KernelFamily::GeneralSubstitution { n: 4, p },
            "general_substitution",
            p,
        )?);
    }
    for &p in &[0.0, 0.01, 0.03, 0.05, 0.1] {
        rows.push(row_for(
            KernelFamily::DnaSubstitution { p, alphabet_size: 4 },
            "dna_substitution",
            p,
        )?);
    }
    for &eps in &[0.0, 0.05, 0.1, 0.2] {
        rows.push(row_for(
            KernelFamily::DnaErasure { epsilon: eps, alphabet_size: 4 },
            "dna_erasure",
            eps,
        )?);
    }
    Ok(rows)
}

/// CSV rendering, one row per grid point.
pub fn rows_to_csv(rows: &[ExampleRow]) -> String {
    let mut out = String::from(
        "family,parameter,eigenvalues_of,eigenvalues,delta_closed_form,delta_numeric,kappa_max,tau_achieved,eta_achieved,cmax_achieved,minus_log_tau,dna_rate\n",
    );
    for r in rows {
        let eigs = r
            .eigenvalues
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(";");
        let eta = r.eta_achieved.map(|v| v.to_string()).unwrap_or_default();
        let rate = r.dna_rate.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.parameter,
            r.eigenvalues_of,
            eigs,
            r.delta_closed_form,
            r.delta_numeric,
            r.kappa_max,
            r.tau_achieved,
            eta,
            r.cmax_achieved,
            r.minus_log_tau,
            rate
        ));
    }
    out
}
