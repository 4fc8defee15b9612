//! Adaptive quantum phase estimation with Gaussian spin-squeezed states.
//!
//! * [`dicke`] — symmetric-subspace states, rotations, moments and readout.
//! * [`channels`] — collective dephasing and depolarization.
//! * [`schedule`] — particle allocation and squeezing per cascade step.
//! * [`protocol`] — one run of the adaptive cascade.
//! * [`stats`] — ensembles, sensitivities and error probabilities.
//! * [`sweep`] — parameter sweeps producing figure datasets.
//! * [`cli`] — the `gss-qpe` command line.

pub mod channels;
pub mod cli;
pub mod dicke;
pub mod error;
pub mod protocol;
mod quadrature;
pub mod schedule;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
