//! Quasi-static, unbalanced three-phase fault simulation for a transmission
//! equivalent feeding a distribution feeder with distributed inverter-based
//! resources (IBRs).
//!
//! The crate is organized bottom-up:
//!
//! - [`netmodel`]: phase-domain network description, symmetrical components,
//!   admittance matrix assembly and fault stamping.
//! - [`devices`]: ZIP loads, capacitors, step-voltage regulators, grid-following
//!   inverters and the fault-ride-through (FRT) trip state machine.
//! - [`ingest`]: JSON network and scenario files with located diagnostics.
//! - [`solver`]: fixed-point current-injection power flow.
//! - [`engine`]: power-to-load-ratio dispatch, the pre-fault / fault /
//!   post-fault timeline and batch sweeps.
//! - [`metrics`]: trip tables, voltage unbalance factor reports, profiles.
//! - [`cli`]: the `simulate`, `sweep` and `validate` commands and their
//!   output files.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod devices;
pub mod engine;
pub mod ingest;
pub mod metrics;
pub mod netmodel;
pub mod solver;

pub use num_complex::Complex64;
