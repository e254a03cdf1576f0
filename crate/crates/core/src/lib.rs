//! Analytic and simulated sensing-throughput tradeoff for a secondary user
//! that energy-detects a band shared by `N` on/off primary users.
//!
//! The crate is `no_std` (it needs `alloc`). Module map:
//!
//! * [`traffic`]: exponential holding times, per-sample transition masses,
//!   channel-state priors.
//! * [`hypothesis`]: probabilities of the `(i, m, k)` occupancy hypotheses
//!   and the exact distributions of accumulated PU energy / interference,
//!   built by discrete convolution.
//! * [`detection`]: conditional and unconditional detection / false-alarm
//!   probabilities and the threshold solver.
//! * [`throughput`]: capacities and average achievable throughput for both
//!   traffic regimes.
//! * [`montecarlo`]: frame-level simulator used to validate the analysis.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod detection;
mod error;
pub mod hypothesis;
pub mod montecarlo;
pub mod throughput;
pub mod traffic;

pub use error::{Error, Result};

/// Where primary users are allowed to change state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeRegime {
    /// Case I: transitions happen only inside the sensing window.
    SensingOnly,
    /// Case II: transitions may happen anywhere in the frame.
    WholeFrame,
}

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}
