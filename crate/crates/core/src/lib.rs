//! Simulation and analysis of single-shot qubit readout with a Josephson
//! parametric oscillator (JPO).
//!
//! A transmon is dispersively coupled to a flux-pumped, frequency-tunable
//! resonator. Pumped above its parametric-instability threshold, the resonator
//! either stays quiet or builds up a large oscillation depending on the qubit
//! state. This crate provides
//!
//! - [`device`]: closed-form tuning curves, nonlinear coefficients, threshold and
//!   steady-state amplitudes;
//! - [`dynamics`]: time-domain integration of the slow-amplitude equation with
//!   qubit jumps, phase switches and fluctuation seeding;
//! - [`chain`]: the heterodyne detection chain and the power/gain calibrations;
//! - [`readout`]: Monte-Carlo readout cycles, histogram analysis, S-curves and
//!   the error budget.
//!
//! Rates and frequencies are angular (rad/s) throughout; see [`units`].

pub mod chain;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod readout;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
