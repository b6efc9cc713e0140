//! Resonator-loaded superconducting metamaterial waveguides.
//!
//! The crate models a transmission line periodically loaded with lumped
//! resonators: its band structure and complex dispersion, finite-length
//! transmission, disorder- and loss-limited localization, and the dynamics
//! of a transmon qubit that couples to it. All quantities are SI and every
//! frequency is angular (rad/s); [`units`] converts at the boundary.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod circuit;
pub mod commands;
pub mod config;
pub mod disorder;
pub mod error;
pub mod exec;
pub mod fit;
pub mod io;
pub mod manifest;
pub mod qubit;
pub mod transmission;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
