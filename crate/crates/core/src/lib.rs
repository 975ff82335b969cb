//! Simulation of quantum-interrogation (interaction-free, Zeno-effect)
//! two-qubit gates on dual-rail bosonic qubits.
//!
//! The crate is split bottom-up:
//!
//! - [`statespace`]: the six-dimensional joint control/target mode space,
//!   dual-rail encoding and state metrics.
//! - [`elements`]: the beamsplitter rotation, its closed-form power, mode-pair
//!   unitaries and the collision (scatter) channel.
//! - [`interrogation`]: the staged protocol, run exactly (post-selected
//!   amplitudes) or as seeded Monte Carlo trajectories.
//! - [`gates`]: CZ/CNOT constructions, conditional gate matrices, truth tables
//!   and fidelity metrics.
//! - [`config`]: the flat `key = value` experiment and sweep format.

pub mod config;
pub mod elements;
pub mod error;
pub mod gates;
pub mod interrogation;
pub mod statespace;

pub use error::{Error, Result};

/// Tolerance used for every normalization and unitarity assertion.
pub const TOL: f64 = 1e-12;
