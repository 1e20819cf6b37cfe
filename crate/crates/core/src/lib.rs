//! Link-level simulation of full-duplex mmWave MIMO links with analog
//! beamforming designed by projected gradient ascent.
//!
//! The crate covers:
//!
//! - [`channel`] — clustered geometric propagation channels and near-field
//!   Rician self-interference channels for collocated TX/RX arrays.
//! - [`optimizer`] — a projected adaptive gradient-ascent driver over sets of
//!   complex beamforming vectors, with unit-norm and constant-amplitude
//!   (phase-only) projections, step halving, and Gaussian/SVD initialization.
//! - [`two_node`] — the bidirectional full-duplex point-to-point link: sum
//!   rate, Wirtinger gradients, and the SVD upper bound.
//! - [`relay`] — the dual-hop full-duplex relay: uplink/downlink rates,
//!   gradients, and full-/half-/hybrid-duplex mode evaluation.
//! - [`montecarlo`] — a seeded, trial-parallel experiment engine producing
//!   ergodic rates, outage curves, rate-gain and convergence statistics.
//!
//! Everything is deterministic given a master seed: per-trial random streams
//! are derived from `(master_seed, sweep index, trial index)`, so serial and
//! parallel runs produce bit-identical results.

pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod relay;
pub mod two_node;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Converts a dB quantity to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear quantity to dB.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
