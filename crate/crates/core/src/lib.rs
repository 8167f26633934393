//! Numerical workbench for the BFK gluing formula
//! `det A₁ / det A₀ = c · det Q`.
//!
//! The crate has three layers:
//!
//! * [`discrete_lab`] checks the finite-dimensional operator identities
//!   (Schur determinant identity, derivative formulas, the interpolation
//!   integral and the contour representation of ζ₁ − ζ₀) on matrix models.
//! * [`model_geometries`], [`zeta_engine`] and [`dtn_models`] supply exact or
//!   controlled spectral data for the interval, the cut circle and the disk.
//! * [`contour`], [`asymptotics`] and [`bfk`] assemble the continuum
//!   verification, and [`cli`] drives everything from the command line.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bfk;
pub mod cli;
pub mod contour;
pub mod discrete_lab;
pub mod dtn_models;
pub mod error;
pub mod model_geometries;
pub mod numerics;
pub mod report;
pub mod zeta_engine;

pub use error::{Error, Result};
