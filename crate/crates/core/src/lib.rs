//! Radial solver and a priori bounds for singular quasilinear systems
//!
//! ```text
//! -Delta_{p1} u = f(x, u, v),   -Delta_{p2} v = g(x, u, v)   in R^N,
//! ```
//!
//! where `f` blows up like `u^{alpha1}` and `g` like `v^{beta2}` near zero.
//! Everything here is radial: fields live on a [`grid::RadialGrid`] and
//! integrals carry the `r^{N-1}` shell weight.
//!
//! The crate is `no_std` with `alloc`. File formats, the command line and
//! parallel sweeps live in the `plapsys` crate.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod bounds;
pub mod error;
pub mod fixedpoint;
pub mod grid;
pub mod hypotheses;
pub mod plap;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Grading, RadialField, RadialGrid};
pub use hypotheses::{derive_exponents, validate, DerivedExponents, ExponentConfig, Side, ValidationReport};
pub use math::unit_sphere_area;
pub use plap::{phi_p, phi_p_inv, solve, Boundary, PLapProblem, TestFunctionSet};
pub use weights::{WeightNorms, WeightSpec};
