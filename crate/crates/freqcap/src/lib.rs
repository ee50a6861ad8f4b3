//! Noisy frequency-based channel toolkit.
//!
//! Models channels whose input is a histogram of object counts and whose
//! output is a noisy sampled histogram: a row-stochastic kernel W mixes the
//! counts, nr samples are drawn multinomially (or Poissonized), and capacity
//! is bracketed by a converse 0.5 ln(r ^ e g) and an achievability bound
//! 0.5 ln r - Psi(r/g) + log det(W W^T)/(2n). The crate builds and analyzes
//! kernels, evaluates both bounds, and probes the concentration and
//! random-coding behavior behind the achievability argument at desk scale.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod infodensity;
pub mod io;
pub mod kernel;
pub mod rng;

pub use error::{Error, Result};
