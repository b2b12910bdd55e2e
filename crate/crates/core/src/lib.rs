//! Spatially homogeneous, isotropic Einstein–Vlasov–Fokker–Planck cosmology.
//!
//! The particle distribution `F(t, |v|)` diffuses in momentum space while the
//! scale factor `a`, Hubble function `H` and cosmological scalar field `φ`
//! follow Friedmann-type equations sourced by the velocity moments of `F`.
//!
//! Layout:
//! - [`grid`]: radial momentum grids and sampled isotropic distributions.
//! - [`fokker_planck`]: conservative implicit diffusion step (TR-BDF2 by default), plus a
//!   Cartesian explicit reference stepper in [`fokker_planck::cartesian`].
//! - [`moments`]: number, energy density, pressure and derived quantities.
//! - [`dynamics`]: Strang-split coupled integrator, initial data, diagnostics.
//! - [`regime`]: closed-form global-existence / blow-up criteria.
//! - [`fit`]: blow-up time extrapolation and asymptotic rate fits.
//! - [`harness`]: configuration, orchestration, sweeps and serialization.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod fokker_planck;
pub mod grid;
pub mod harness;
pub mod moments;
pub mod regime;
pub mod special;

pub use error::{Error, Result};
