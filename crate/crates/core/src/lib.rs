//! Measurement-induced bistability of a driven transmon–cavity system.
//!
//! Two complementary pictures are provided:
//!
//! * [`spectrum`] + [`mist`]: dressed energies of the generalized
//!   Jaynes–Cummings ladder and the photon numbers where dressed levels
//!   from neighbouring excitation strips cross.
//! * [`effres`] + [`scd`] + [`fixed_points`] + [`response`]: a mean-field
//!   cavity amplitude driven through the photon-number dependent effective
//!   resonance, its steady states and the resulting readout maps.
//!
//! All frequencies are angular (rad/s) and all times are in seconds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod effres;
pub mod error;
pub mod fixed_points;
pub mod format;
pub mod interp;
pub mod mist;
pub mod ode;
pub mod params;
pub mod response;
pub mod scd;
pub mod spectrum;
pub mod svg;
pub mod tridiag;

pub use error::{Error, Result};
pub use params::{EtaConvention, KappaConvention, Labeling, SystemParams};
