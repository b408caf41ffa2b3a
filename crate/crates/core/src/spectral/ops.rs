use num_complex::Complex64;

use super::fft::fft2;
use super::field::{GradientField, ScalarField, SpectralField, SymTensorField, VectorField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Forward transform; a constant `c` maps to zero mode `c·n²`.
pub fn transform(field: &ScalarField) -> SpectralField {
    let g = field.grid();
    let mut buf: Vec<Complex64> = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, g.n(), false);
    SpectralField::from_raw(g, buf)
}

/// Inverse transform, keeping the real part.
///
/// Odd symbols evaluated at the Nyquist index break conjugate symmetry on
/// that line; taking the real part projects those modes out consistently.
pub fn inverse_transform(f: &SpectralField) -> ScalarField {
    let g = f.grid();
    let mut buf = f.coeffs().to_vec();
    fft2(&mut buf, g.n(), true);
    let scale = 1.0 / g.len() as f64;
    ScalarField::from_raw(g, buf.iter().map(|c| c.re * scale).collect())
}

/// Riesz transform `R_j` with multiplier `ξ_j/|ξ|` (axis `j ∈ {1, 2}`).
///
/// The output of a single transform represents an imaginary-valued field;
/// even compositions such as `R_iR_j` are real again.
pub fn riesz(j: usize, f: &SpectralField) -> SpectralField {
    assert!(j == 1 || j == 2, "axis index must be 1 or 2");
    f.apply_real_symbol(|k1, k2| {
        let r = k1.hypot(k2);
        if r == 0.0 {
            0.0
        } else if j == 1 {
            k1 / r
        } else {
            k2 / r
        }
    })
}

/// Double Riesz transform `R_iR_j` with multiplier `ξ_iξ_j/|ξ|²`.
pub fn riesz2(i: usize, j: usize, f: &SpectralField) -> SpectralField {
    assert!(
        (1..=2).contains(&i) && (1..=2).contains(&j),
        "axis index must be 1 or 2"
    );
    f.apply_real_symbol(|k1, k2| {
        let r2 = k1 * k1 + k2 * k2;
        if r2 == 0.0 {
            return 0.0;
        }
        let a = if i == 1 { k1 } else { k2 };
        let b = if j == 1 { k1 } else { k2 };
        a * b / r2
    })
}

/// Spectral derivative `∂_j` (multiplier `iξ_j`).
pub fn derivative(j: usize, f: &SpectralField) -> SpectralField {
    assert!(j == 1 || j == 2, "axis index must be 1 or 2");
    f.apply_symbol(|k1, k2| I * if j == 1 { k1 } else { k2 })
}

/// Laplacian (multiplier `−|ξ|²`).
pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.apply_real_symbol(|k1, k2| -(k1 * k1 + k2 * k2))
}

pub(crate) fn check_mean_zero(f: &SpectralField) -> Result<()> {
    let n2 = f.grid().len() as f64;
    let mean = f.coeffs()[0].norm() / n2;
    let rms = (f.energy_sum()).sqrt() / n2;
    if mean > 1e-12 * rms.max(1.0) {
        Err(Error::NonzeroMean { mean })
    } else {
        Ok(())
    }
}

/// `Δ⁻¹` with multiplier `−1/|ξ|²`; rejects fields with nonzero mean.
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    check_mean_zero(f)?;
    Ok(inverse_laplacian_unchecked(f))
}

pub(crate) fn inverse_laplacian_unchecked(f: &SpectralField) -> SpectralField {
    f.apply_real_symbol(|k1, k2| {
        let r2 = k1 * k1 + k2 * k2;
        if r2 == 0.0 {
            0.0
        } else {
            -1.0 / r2
        }
    })
}

/// Velocity coefficients `u = ∇⊥Δ⁻¹ω` from vorticity coefficients.
pub fn biot_savart_spectral(omega: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    check_mean_zero(omega)?;
    Ok(biot_savart_unchecked(omega))
}

pub(crate) fn biot_savart_unchecked(omega: &SpectralField) -> (SpectralField, SpectralField) {
    let u1 = omega.apply_symbol(|k1, k2| {
        let r2 = k1 * k1 + k2 * k2;
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            I * k2 / r2
        }
    });
    let u2 = omega.apply_symbol(|k1, k2| {
        let r2 = k1 * k1 + k2 * k2;
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -I * k1 / r2
        }
    });
    (u1, u2)
}

/// Velocity `u = ∇⊥Δ⁻¹ω` with `∇⊥ = (−∂₂, ∂₁)`.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    let (u1, u2) = biot_savart_spectral(&transform(omega))?;
    Ok(VectorField {
        x: inverse_transform(&u1),
        y: inverse_transform(&u2),
    })
}

/// Scalar curl `∇⊥·u = ∂₁u₂ − ∂₂u₁`.
pub fn curl(u: &VectorField) -> ScalarField {
    let a = derivative(1, &transform(&u.y));
    let b = derivative(2, &transform(&u.x));
    inverse_transform(&a.sub(&b).expect("same grid"))
}

/// Divergence `∂₁u₁ + ∂₂u₂`.
pub fn divergence(u: &VectorField) -> ScalarField {
    let a = derivative(1, &transform(&u.x));
    let b = derivative(2, &transform(&u.y));
    inverse_transform(&a.add(&b).expect("same grid"))
}

/// Gradient of a scalar field.
pub fn gradient(f: &ScalarField) -> VectorField {
    let fh = transform(f);
    VectorField {
        x: inverse_transform(&derivative(1, &fh)),
        y: inverse_transform(&derivative(2, &fh)),
    }
}

/// Velocity gradient `G_ij = ∂_j u_i`.
pub fn velocity_gradient(u: &VectorField) -> GradientField {
    let ax = transform(&u.x);
    let ay = transform(&u.y);
    velocity_gradient_spectral(&ax, &ay)
}

pub(crate) fn velocity_gradient_spectral(ux: &SpectralField, uy: &SpectralField) -> GradientField {
    GradientField {
        g11: inverse_transform(&derivative(1, ux)),
        g12: inverse_transform(&derivative(2, ux)),
        g21: inverse_transform(&derivative(1, uy)),
        g22: inverse_transform(&derivative(2, uy)),
    }
}

/// Strain `(Su)_ij = ∂_iu_j + ∂_ju_i`.
pub fn strain(u: &VectorField) -> SymTensorField {
    let g = velocity_gradient(u);
    SymTensorField {
        s11: g.g11.scale(2.0),
        s12: g.g12.add(&g.g21).expect("same grid"),
        s22: g.g22.scale(2.0),
    }
}

/// Pointwise product projected onto the dealiased band.
pub fn dealiased_product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let p = f.mul(g)?;
    Ok(inverse_transform(&transform(&p).dealiased()))
}

/// Projects a field onto the dealiased band.
pub fn dealias(f: &ScalarField) -> ScalarField {
    inverse_transform(&transform(f).dealiased())
}
