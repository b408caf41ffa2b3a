//! Pseudo-spectral simulator for two-dimensional incompressible flow with a
//! transported, possibly discontinuous viscosity, together with the
//! diagnostics used to check the associated operator identities and
//! a priori estimates on a periodic torus.

// validation writes `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod io;
pub mod random;
pub mod solver;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
