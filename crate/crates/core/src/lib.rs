//! Qudit state-vector simulation of the complete GHZ-state measurement
//! protocol for `n` photons carrying `d`-level spatial and OAM qudits.
//!
//! The crate is `no_std` (it needs `alloc`). Every state lives on the
//! composite space of `2n` qudits: the spatial register (photon 0..n)
//! followed by the OAM register (photon 0..n). The pipeline is
//!
//! 1. prepare `|psi_x^k> (x) |phi_0>` ([`ghz::hyper_initial`]),
//! 2. apply the path-control gate on every photon ([`gates::apply_path_control_all`]),
//! 3. read the OAM register and decode the parity vector `x`,
//! 4. apply the QFT to every spatial qudit and read the spatial register,
//!    decoding the phase index `k`.
//!
//! [`verify`] checks that the decoders recover every label with certainty
//! and cross-checks the sparse pipeline against a naive dense oracle.

#![no_std]

extern crate alloc;

mod error;
pub mod gates;
pub mod ghz;
pub mod protocol;
mod shape;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use ghz::GhzLabel;
pub use protocol::{MeasurementRecord, Outcome, OutcomeDistribution, Register};
pub use shape::{SystemShape, DEFAULT_DENSE_CAP, DEFAULT_LABEL_CAP};
pub use state::{Representation, StateVector};

pub use num_complex::Complex64;

/// Magnitudes below this are dropped from sparse storage.
pub const ZERO_EPS: f64 = 1e-12;

/// Outcomes with probability above this count as physically possible.
pub const SUPPORT_EPS: f64 = 1e-9;
