//! Least-squares fits of transmission traces: single-resonance Fano
//! lineshapes and full lumped-element cascade models.

mod fano;
mod lsq;
mod lumped;

pub use fano::{fano_s21, fit_fano, FanoFit};
pub use lsq::{minimize, LsqOutcome};
pub use lumped::{fit_lumped_model, CascadeLayout, LumpedFit};
