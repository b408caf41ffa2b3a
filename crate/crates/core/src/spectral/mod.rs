//! Periodic grid, FFT transforms and Fourier-multiplier operators.
//!
//! Fields live on `[0, l)²`. All symbol operators act on
//! [`SpectralField`] coefficients; scalar helpers wrap the transform round trip.

mod fft;
mod field;
mod grid;
mod norms;
mod ops;

pub use field::{GradientField, ScalarField, SpectralField, SymTensorField, VectorField};
pub use grid::{DealiasRule, Grid};
pub use norms::{linf_norm, lp_norm, lp_norm_multi, lp_norm_vec, relative_l2, sobolev_norm, sobolev_norm_vec};
pub use ops::{
    biot_savart, biot_savart_spectral, curl, dealias, dealiased_product, derivative, divergence, gradient,
    inverse_laplacian, inverse_transform, laplacian, riesz, riesz2, strain, transform, velocity_gradient,
};
pub(crate) use ops::{biot_savart_unchecked, check_mean_zero, inverse_laplacian_unchecked, velocity_gradient_spectral};
