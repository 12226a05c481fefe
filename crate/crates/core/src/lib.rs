//! Trajectory thermodynamics for open quantum systems.
//!
//! Given a density-matrix trajectory `rho(t)`, either propagated internally
//! from a Lindblad generator or ingested as snapshots, this crate resolves
//! the motion into the instantaneous eigenframe of the state, builds the
//! counterdiabatic generator that retraces the trajectory exactly, and
//! splits the energy flow into heat carried by population transfer and work
//! carried by basis rotation. On top of that split it maintains a ledger of
//! entropy production and audits the identities and bounds the ledger is
//! supposed to satisfy.
//!
//! Natural units throughout: `hbar = kB = 1`.
//!
//! The crate is `no_std` (alloc required). IO, file formats and the command
//! line live in the companion `qtraj-cli` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod generators;
pub mod linalg;
pub mod propagator;
pub mod scenarios;
pub mod spectral;
pub mod tbsta;
pub mod thermo;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::Complex64;
