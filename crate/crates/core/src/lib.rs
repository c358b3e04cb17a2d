//! Simulation of two-frequency Jahn-Teller physics in a circuit QED
//! architecture: a qubit coupled to two hopping-coupled resonators.
//!
//! * [`operators`]: qubit ⊗ mode ⊗ mode operator algebra.
//! * [`model`]: Hamiltonian families, the privileged-mode transformation and
//!   parameter dictionaries.
//! * [`dynamics`]: Lindblad master equation, steady state, two-time
//!   correlations and emission spectra.
//! * [`cli`]: configuration, sweep runners and table output.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod operators;

pub use error::{Error, Result};
