//! Energy-class mean-spin simulation of spin self-rephasing in a trapped
//! thermal two-level ensemble, together with the clock-metrology tools used to
//! analyse it: Ramsey fringe fitting, two-stage shift extrapolation, overlapping
//! Allan deviation and noise budgeting.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration and
//! the command-line front end live in the `ssr` crate.
//!
//! Units are SI throughout, with two exceptions fixed at type boundaries:
//! light-shift coefficients are carried in Hz per (kW cm⁻²) and intensities in
//! kW cm⁻², matching how they are quoted in the lab.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod constants;
pub mod dynamics;
mod error;
pub mod physics;
pub mod stability;

pub use error::{Error, Result};

pub use nalgebra::Vector3;
