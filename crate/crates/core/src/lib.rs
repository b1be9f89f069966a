//! Sequential Ramsey measurements on a qubit coupled to a harmonic oscillator.
//!
//! The crate is `no_std` (it needs `alloc`) and splits into analytic models
//! ([`phase_space`], [`pulses`], [`ramsey`], [`lgi`], [`classical`],
//! [`decoherence`]) and a truncated Fock-space reference engine ([`fock`])
//! that the analytic results are checked against.
#![cfg_attr(not(test), no_std)]
// Modules import `num_traits::Float` for no_std float math. Whenever std is
// in the crate graph the inherent `f64` methods win, so those imports carry
// `allow(unused_imports)`.

extern crate alloc;

pub mod classical;
pub mod decoherence;
pub mod error;
pub mod fock;
pub mod lgi;
pub mod optimize;
pub mod phase_space;
pub mod pulses;
pub mod ramsey;
pub mod stats;

pub use error::{Error, Result};
pub use phase_space::{CatComponent, ComplexAmp, DisplacementProduct, OscillatorState};
pub use pulses::{DisplacementRecord, PulseSchedule, Segment, SystemParams};
pub use ramsey::{CorrelationRequest, MeasurementSpec};
