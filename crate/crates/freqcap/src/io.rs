//! CSV ingestion for kernels and count vectors.
//!
//! Kernel files carry one row per line, comma-separated probabilities, no
//! header. Blank lines and `#` comment lines are skipped.

use std::path::Path;

use crate::channel::CountVector;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_kernel_csv(text: &str) -> Result<TransitionKernel> {
    let mut rows = Vec::new();
    for line in data_lines(text) {
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad probability {tok:?}: {e}")))
            })
            .collect();
        rows.push(row?);
    }
    TransitionKernel::new(rows)
}

pub fn read_kernel_csv(path: &Path) -> Result<TransitionKernel> {
    parse_kernel_csv(&std::fs::read_to_string(path)?)
}

/// Count vector from comma- or line-separated nonnegative integers.
pub fn parse_counts_csv(text: &str) -> Result<CountVector> {
    let mut counts = Vec::new();
    for line in data_lines(text) {
        for tok in line.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            counts.push(
                tok.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad count {tok:?}: {e}")))?,
            );
        }
    }
    if counts.is_empty() {
        return Err(Error::Parse("no counts found".into()));
    }
    Ok(CountVector(counts))
}

pub fn read_counts_csv(path: &Path) -> Result<CountVector> {
    parse_counts_csv(&std::fs::read_to_string(path)?)
}

/// pmf over {1..s} from one float per line (or comma-separated).
pub fn parse_pmf_csv(text: &str) -> Result<Vec<f64>> {
    let mut pmf = Vec::new();
    for line in data_lines(text) {
        for tok in line.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            pmf.push(
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad probability {tok:?}: {e}")))?,
            );
        }
    }
    Ok(pmf)
}
