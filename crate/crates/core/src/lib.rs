//! Numerical laboratory for radial Schrödinger maps `u_t = u × Δu` into the
//! sphere, the nonlocal cubic NLS satisfied by their frame coordinates, and the
//! parallel-frame transform linking the two.
//!
//! Everything lives on a cell-centered radial mesh ([`grid`]). The NLS is
//! integrated by Strang splitting ([`nls`]), the map flow by projected RK4
//! ([`smap`]); [`hasimoto`] moves between the two pictures and
//! [`diagnostics`] evaluates the conserved and monotone functionals. The
//! [`harness`] module drives complete experiments and writes their output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod hankel;
pub mod harness;
pub mod hasimoto;
pub mod nls;
pub mod profiles;
pub mod smap;

pub use error::{Error, Result};
pub use grid::{
    integrate, l2_norm, laplacian_m0, laplacian_m1, make_grid, nonlocal_i, ComplexRadialField,
    RadialField, RadialGrid, RealRadialField, Vec3, VectorRadialField,
};
pub use nls::{NlsParams, NlsState, SolverConfig};
pub use smap::{SmapState, SphereMapField};
