//! Simulator for a multi-round probe-qubit resonance algorithm on 3-bit exact cover.
//!
//! The pieces, bottom up:
//!
//! - [`model`]: instances, clause evaluation and the brute-force oracle.
//! - [`operator`]: clause/register diagonals and the structured full Hamiltonian.
//! - [`engine`]: exact and split-operator evolution, probe measurement,
//!   three-level decomposition of full states.
//! - [`protocol`]: round preparation, time scans, the decay/purification loop
//!   and end-to-end runs.
//! - [`reduced`]: the closed-form three-level and two-level models.
//! - [`report`]: JSON run reports and atomic file output.
//! - [`validation`]: full-versus-reduced comparisons and Trotter convergence.

pub mod engine;
pub mod error;
pub mod krylov;
pub mod model;
pub mod operator;
pub mod protocol;
pub mod reduced;
pub mod report;
pub mod rng;
pub mod state;
pub mod validation;

pub use error::{Error, Result};
