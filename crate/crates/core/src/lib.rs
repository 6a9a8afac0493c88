//! Spin-dependent two-photon Kapitza-Dirac scattering.
//!
//! An electron crossing a standing light wave made from a linearly and a
//! circularly polarized beam can be Bragg-diffracted by absorbing one photon
//! and emitting one into the counter-propagating beam. For a suitably tuned
//! electron momentum the spin-preserving part of that two-photon amplitude
//! cancels and the process acts as a spin filter and polarizer.
//!
//! This crate carries the numerical core:
//!
//! * [`dirac`]: Pauli/Dirac algebra, free bispinors and the coupling terms.
//! * [`field`]: the standing-wave configuration, envelope and the momentum ladder.
//! * [`evolution`]: time integration of the momentum-space Dirac system.
//! * [`perturbation`]: closed-form resonant second-order amplitudes.
//! * [`compton`]: time-ordered Compton amplitudes and the covariant tensor.
//! * [`analysis`]: tilted-basis projections, Rabi fits and channel reports.
//! * [`experiment`]: SI-unit count-rate estimates.
//!
//! All quantities are in natural units with `m = ħ = c = 1` unless a name
//! says otherwise. The crate is `no_std` (with `alloc`) when built without
//! the default `std` feature; enable `libm` in that case.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod compton;
pub mod consts;
pub mod dirac;
mod error;
pub mod evolution;
pub mod experiment;
pub mod field;
pub mod linalg;
pub mod perturbation;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
