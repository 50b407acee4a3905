//! Design toolkit for collecting single photons emitted by a trapped ion into
//! a single-mode fiber.
//!
//! Two collection strategies are modelled:
//!
//! * a plano-concave fiber-tip cavity ([`cavity`]), where the photon leaves
//!   through the coated fiber end, and
//! * high numerical aperture reflectors ([`mirror`]), where the dipole
//!   emission is ray traced off a parabolic or spherical mirror, matched to a
//!   Gaussian mode and optionally corrected with a phase plate.
//!
//! [`beam`], [`dipole`] and [`field`] hold the shared Gaussian-beam,
//! dipole-emission and mode-overlap machinery. [`budget`] composes collection
//! efficiencies into two-photon coincidence and remote entanglement rates.
//!
//! All quantities are SI internally (metres, radians, seconds, rad/s for
//! rates). Conversion to nm/µm/mm/MHz happens only at the file boundary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod budget;
pub mod cavity;
pub mod consts;
pub mod dipole;
mod error;
pub mod field;
pub mod mirror;
pub mod optimize;
pub mod par;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use par::Execution;
