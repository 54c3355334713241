//! Near-field focusing engine for three-dimensional large intelligent surfaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: real special functions (sinc, spherical Bessel, J0, Struve,
//!   sine integral, complete elliptic integral).
//! - [`quad`]: adaptive Gauss-Kronrod quadrature used by the analytic
//!   fallbacks and by the test oracles.
//! - [`geometry`]: ring arrays of Hertzian dipoles, cylinder and rectangular
//!   corridor meshes, evaluation grids.
//! - [`em`]: dyadic Green's functions, the Hertzian-dipole approximation,
//!   channel assembly and field superposition.
//! - [`focusing`]: conjugate-phase, time-reversal and hybrid (clip + bisection)
//!   excitations, plus an independent projected-gradient optimality oracle.
//! - [`analytic`]: closed-form focal kernels, axis intensities and resolution
//!   profiles for long cylindrical apertures.
//! - [`metrics`]: 3-dB widths, nulls, sidelobes, 3-dB contours.
//! - [`scenario`]: scenario files, artifact writers and the `run` /
//!   `validate` / `analytic` / `layout` pipelines behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod em;
pub mod focusing;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod quad;
pub mod scenario;
pub mod specfun;
pub mod vector;

pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// Free-space wave impedance (Ohm), from the 2019 SI value of mu0.
pub const ETA0: f64 = 376.730_313_412;
