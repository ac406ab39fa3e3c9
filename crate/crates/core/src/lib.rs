//! Core channel models for particle communication through time-varying
//! diffusion-advection media.
//!
//! Particles released from a point source drift with a spatially uniform,
//! time-varying horizontal wind while diffusing in three dimensions above a
//! perfectly absorbing ground plane. This crate provides:
//!
//! - wind mean/covariance models, integrated-wind statistics and Gaussian
//!   path sampling ([`wind`]),
//! - the free-space heat kernel, the half-space image kernel and the
//!   linear time-varying impulse response ([`kernel`]),
//! - analytic channel statistics: mean response, autocorrelation via
//!   Gaussian quadratic-form MGFs, power delay profile, Peclet number and
//!   dispersion time ([`stats`]),
//! - orthonormal rectangular pulse sets, nonnegative amplitude constellations
//!   and modulation ([`pulse`]),
//! - receiver primitives: AWGN injection, matched filtering, two-step symbol
//!   timing recovery, pilot-trained MMSE equalization and minimum-distance
//!   detection ([`rx`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm` feature
//! instead of the default `std` feature for freestanding builds. Everything
//! is deterministic given explicit seeds, and all types are immutable after
//! construction so evaluation can be freely parallelized by callers.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("diffadv-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod kernel;
pub mod pulse;
pub mod rx;
pub mod scenario;
pub mod seed;
pub mod stats;
pub mod wind;

pub mod mat2;

mod math;

pub use kernel::{Geometry, GeometryError, Medium};
pub use scenario::Scenario;
pub use wind::{CovarianceKernel, TimeGrid, WindModel, WindPath};
